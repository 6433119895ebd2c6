import json
import os

import pytest

from primeomega import cli


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def read_all_bytes(dirpath):
    return {
        name: open(os.path.join(dirpath, name), "rb").read()
        for name in sorted(os.listdir(dirpath))
    }


@pytest.fixture()
def run_dir(tmp_path, capsys):
    rc, out, _ = run_cli(
        capsys, "sieve", "--n-max", "1e4", "--checkpoints", "decades",
        "--out-dir", str(tmp_path),
    )
    assert rc == 0
    return json.loads(out)["run_dir"]


class TestSieveCommand:
    def test_writes_checkpoint_files(self, run_dir):
        names = sorted(os.listdir(run_dir))
        assert "config.json" in names
        assert sum(n.startswith("checkpoint_") for n in names) == 3
        assert sum(n.startswith("hist_") for n in names) == 3
        assert sum(n.startswith("aux_") for n in names) == 3

    def test_rerun_byte_identical(self, run_dir, tmp_path, capsys):
        before = read_all_bytes(run_dir)
        rc, _, _ = run_cli(
            capsys, "sieve", "--n-max", "1e4", "--checkpoints", "decades",
            "--out-dir", str(tmp_path), "--workers", "3",
        )
        assert rc == 0
        assert read_all_bytes(run_dir) == before

    def test_small_n_max_rejected(self, tmp_path, capsys):
        rc, _, err = run_cli(capsys, "sieve", "--n-max", "10",
                             "--out-dir", str(tmp_path))
        assert rc == 2
        assert "double-log domain" in err

    def test_explicit_checkpoints(self, tmp_path, capsys):
        rc, out, _ = run_cli(
            capsys, "sieve", "--n-max", "1000", "--checkpoints", "100,1000",
            "--out-dir", str(tmp_path),
        )
        assert rc == 0
        assert json.loads(out)["checkpoints"] == [100, 1000]


class TestVerifyCommand:
    def test_fresh_run_passes(self, run_dir, capsys):
        rc, out, _ = run_cli(capsys, "verify", "--run-dir", run_dir)
        assert rc == 0
        payload = json.loads(out)
        assert payload["passed"]
        names = {c["name"] for c in payload["checks"]}
        assert {"partition_pi", "partition_xi", "partition_eta",
                "monotone_in_n", "eta_uniform_bound"} <= names

    def test_tampered_checkpoint_detected(self, run_dir, capsys):
        target = next(
            os.path.join(run_dir, f)
            for f in sorted(os.listdir(run_dir))
            if f.startswith("checkpoint_000000010000")
        )
        text = open(target).read()
        lines = text.splitlines()
        # flip one digit of a pi entry on the k=2 row
        parts = lines[3].split(",")
        parts[2] = str(int(parts[2]) + 1)
        lines[3] = ",".join(parts)
        open(target, "w").write("\n".join(lines) + "\n")
        rc, out, _ = run_cli(capsys, "verify", "--run-dir", run_dir)
        payload = json.loads(out)
        assert rc == 1 and not payload["passed"]
        failed = [c["name"] for c in payload["checks"] if not c["passed"]]
        assert "partition_pi" in failed

    def test_empty_directory(self, tmp_path, capsys):
        rc, _, err = run_cli(capsys, "verify", "--run-dir", str(tmp_path))
        assert rc == 2
        assert "no checkpoints found" in err


class TestAverageCommand:
    def test_csv_shape(self, run_dir, capsys):
        rc, out, _ = run_cli(
            capsys, "average", "--scheme", "loglog", "--system", "periodic:2",
            "--run-dir", run_dir,
        )
        assert rc == 0
        lines = out.strip().splitlines()
        assert lines[0] == "scheme,N,value,normalizer"
        assert len(lines) == 4
        for line in lines[1:]:
            scheme, n, value, norm = line.split(",")
            assert scheme == "loglog"
            assert float(value) > 0 and float(norm) > 0

    def test_fresh_compute_matches_run_dir(self, run_dir, tmp_path, capsys):
        rc, from_run, _ = run_cli(
            capsys, "average", "--scheme", "cesaro", "--system", "periodic:2",
            "--run-dir", run_dir,
        )
        assert rc == 0
        rc, fresh, _ = run_cli(
            capsys, "average", "--scheme", "cesaro", "--system", "periodic:2",
            "--n-max", "1e4", "--checkpoints", "decades",
        )
        assert rc == 0
        assert fresh == from_run

    def test_idempotent_output_file(self, run_dir, tmp_path, capsys):
        out_path = tmp_path / "avg.csv"
        for _ in range(2):
            rc, _, _ = run_cli(
                capsys, "average", "--scheme", "log", "--system", "rotation:0.618034",
                "--run-dir", run_dir, "--out", str(out_path),
            )
            assert rc == 0
        first = out_path.read_bytes()
        assert first == out_path.read_bytes()

    def test_bad_scheme_rejected(self, run_dir, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli(capsys, "average", "--scheme", "median",
                    "--system", "periodic:2", "--run-dir", run_dir)
        assert exc.value.code == 2


class TestSweepoutCommand:
    def test_floor_log2_verdict_true(self, capsys):
        rc, out, _ = run_cli(capsys, "sweepout", "--seq", "floor_log2",
                             "--C", "5", "--eps", "0.1")
        assert rc == 0
        payload = json.loads(out)
        assert payload["witness"]["verdict"] is True
        assert payload["verified"] is True
        assert payload["cover_ratio"] > 5.0

    def test_identity_fails_at_growth_gate(self, capsys):
        rc, out, _ = run_cli(capsys, "sweepout", "--seq", "identity",
                             "--C", "5", "--eps", "0.1", "--budget-log2", "200")
        assert rc == 1
        payload = json.loads(out)
        assert payload["gate"] == "growth_ratio"

    def test_unknown_sequence(self, capsys):
        rc, _, err = run_cli(capsys, "sweepout", "--seq", "fibonacci")
        assert rc == 2
        assert "unknown sequence" in err


class TestMaximalCommand:
    def test_spike_certificate(self, tmp_path, capsys):
        phi_path = tmp_path / "spike.txt"
        phi_path.write_text("50 1.0\n")
        rc, out, _ = run_cli(
            capsys, "maximal", "--phi", str(phi_path), "--n-max", "1e4",
            "--checkpoints", "16,100,1000,10000",
        )
        assert rc == 0
        payload = json.loads(out)
        assert payload["verified"] is True
        assert len(payload["exceedance"]) <= payload["d_constant"] * payload["mass"]

    def test_missing_signal_file(self, capsys):
        rc, _, err = run_cli(capsys, "maximal", "--phi", "/nonexistent.txt")
        assert rc == 2


class TestReportCommand:
    def test_report_structure(self, run_dir, capsys):
        rc, out, _ = run_cli(capsys, "report", "--run-dir", run_dir)
        assert rc == 0
        payload = json.loads(out)
        assert "eta_prime_bracket" in payload
        ns = [entry["n"] for entry in payload["checkpoints"]]
        assert ns == sorted(ns)
        entry = payload["checkpoints"][-1]
        assert "landau_ratio" in entry and "hr_fraction" in entry
        assert "clt" in payload


class TestExitCodes:
    def test_no_command_prints_help(self, capsys):
        rc, out, _ = run_cli(capsys)
        assert rc == 2

    def test_backend_info(self, capsys):
        rc, out, _ = run_cli(capsys, "--backend-info")
        assert rc == 0
        assert json.loads(out)["backend"] in ("cython", "python")


class TestOutputDirEnvVar:
    def test_default_out_dir_from_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("PRIMEOMEGA_OUT", str(tmp_path / "envruns"))
        rc, out, _ = run_cli(capsys, "sieve", "--n-max", "1000",
                             "--checkpoints", "100,1000")
        assert rc == 0
        assert json.loads(out)["run_dir"].startswith(str(tmp_path / "envruns"))
