"""Command-line front-end: sieve runs, verification, averages, certificates.

Exit codes: 0 success, 1 verification/build failure, 2 usage or config error.
Default output directory comes from PRIMEOMEGA_OUT (falling back to ./runs).
"""

import argparse
import json
import math
import os
import sys

from . import averaging, backend, dynamics, maximal, stats, sweepout
from .sieve import SieveConfig, SieveError, stream_stats

MIN_N = stats.MIN_DOUBLE_LOG_N


def _int_arg(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(value)


def _parse_checkpoints(spec: str, n_max: int) -> tuple[int, ...]:
    if spec == "geometric":
        return tuple(averaging.geometric_checkpoints(n_max))
    if spec == "decades":
        cps = []
        p = 100
        while p <= n_max:
            cps.append(p)
            p *= 10
        if cps and cps[-1] != n_max:
            cps.append(n_max)
        return tuple(cps)
    if spec.startswith("lacunary:"):
        rho = float(spec.split(":", 1)[1])
        values, _ = averaging.lacunary_checkpoints(rho, n_max)
        return tuple(v for v in values if v >= MIN_N)
    return tuple(_int_arg(x) for x in spec.split(","))


def _out_dir(args) -> str:
    return args.out_dir or os.environ.get("PRIMEOMEGA_OUT", "runs")


def cmd_sieve(args) -> int:
    if args.n_max < MIN_N:
        print(f"error: --n-max below double-log domain (need >= {MIN_N})",
              file=sys.stderr)
        return 2
    try:
        checkpoints = _parse_checkpoints(args.checkpoints, args.n_max)
        config = SieveConfig(n_max=args.n_max,
                             block_size=min(args.block_size, args.n_max),
                             checkpoints=checkpoints)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    run_dir = os.path.join(_out_dir(args), stats.run_dir_name(config))
    os.makedirs(run_dir, exist_ok=True)
    acc = stats.WeightAccumulator(
        config.n_max, config.checkpoints,
        on_table=lambda t: stats.write_checkpoint(run_dir, t),
    )
    consumers = [acc]
    if not args.no_aux:
        consumers.append(stats.AuxAccumulator(
            config.n_max, config.checkpoints,
            on_table=lambda t: stats.write_aux(run_dir, t),
        ))
    try:
        report = stream_stats(config, consumers, workers=args.workers)
    except SieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    stats.write_run_config(run_dir, config)
    print(json.dumps({
        "run_dir": run_dir,
        "checkpoints": list(config.checkpoints),
        "blocks": report.blocks,
        "backend": report.backend,
        "seconds": round(report.seconds, 3),
    }))
    return 0


def _load_run(args):
    try:
        return stats.load_run(args.run_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def cmd_verify(args) -> int:
    loaded = _load_run(args)
    if loaded is None:
        return 2
    _, tables, _ = loaded
    tables.sort(key=lambda t: t.n)
    checks = []

    def add(name, n, passed, detail=""):
        checks.append({"name": name, "n": n, "passed": bool(passed), "detail": detail})

    cps = [t.n for t in tables]
    harmonic = stats.harmonic_direct(cps)
    eta_mass = stats.double_log_mass_direct(cps)
    for t in tables:
        add("partition_pi", t.n, int(t.pi.sum()) == t.n, f"sum={int(t.pi.sum())}")
        xs = math.fsum(t.xi)
        rel = abs(xs - harmonic[t.n]) / harmonic[t.n]
        add("partition_xi", t.n, rel <= 1e-10, f"rel={rel:.3e}")
        es = math.fsum(t.eta)
        rel = abs(es - eta_mass[t.n]) / eta_mass[t.n]
        add("partition_eta", t.n, rel <= 1e-10, f"rel={rel:.3e}")
        add("hist_total", t.n, t.ek_hist.total == t.n, f"total={t.ek_hist.total}")
        if t.n >= MIN_N:
            frs = [stats.hr_fraction(t, c) for c in (2.0, 3.0, 4.0)]
            add("hr_monotone_in_c", t.n, frs[0] >= frs[1] >= frs[2],
                "fractions=" + ",".join(f"{f:.4f}" for f in frs))
            d = stats.ek_cdf_distance(t)
            add("ek_distance_range", t.n, 0.0 <= d <= 1.0, f"distance={d:.4f}")
    for prev, cur in zip(tables, tables[1:]):
        kk = prev.k_max + 1
        ok = (
            (cur.pi[:kk] >= prev.pi).all()
            and (cur.xi[:kk] >= prev.xi - 1e-15).all()
            and (cur.eta[:kk] >= prev.eta - 1e-15).all()
        )
        add("monotone_in_n", cur.n, ok, f"vs N={prev.n}")
    largest = tables[-1]
    eta1_upper = float(largest.eta[1]) + 2.0 / math.log(largest.n)
    ok = all(float(t.eta[k]) <= eta1_upper
             for t in tables for k in range(t.k_max + 1))
    add("eta_uniform_bound", largest.n, ok, f"upper={eta1_upper:.6f}")
    if largest.n >= 10**9:
        zh = all(largest.eta[k] < largest.eta[1]
                 for k in range(2, largest.k_max + 1))
        add("eta_peak_at_primes", largest.n, zh, "eta[k] < eta[1] for k >= 2")
    passed = all(c["passed"] for c in checks)
    print(json.dumps({"passed": passed, "checks": checks}, indent=2))
    return 0 if passed else 1


def cmd_average(args) -> int:
    try:
        system = dynamics.parse_system(args.system)
        scheme = averaging.scheme_by_name(args.scheme)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.run_dir:
        loaded = _load_run(args)
        if loaded is None:
            return 2
        _, tables, _ = loaded
    else:
        if args.n_max is None:
            print("error: need --run-dir or --n-max", file=sys.stderr)
            return 2
        if args.n_max < MIN_N:
            print(f"error: --n-max below double-log domain (need >= {MIN_N})",
                  file=sys.stderr)
            return 2
        checkpoints = _parse_checkpoints(args.checkpoints, args.n_max)
        config = SieveConfig(n_max=args.n_max,
                             block_size=min(1 << 20, args.n_max),
                             checkpoints=checkpoints)
        acc = stats.WeightAccumulator(config.n_max, config.checkpoints)
        stream_stats(config, [acc], workers=args.workers)
        tables = acc.tables
    tables = sorted(tables, key=lambda t: t.n)
    k_need = max(t.k_max for t in tables)
    orbit = dynamics.orbit_values(system, k_need)
    lines = ["scheme,N,value,normalizer"]
    for t in tables:
        if isinstance(scheme, averaging.DoubleLog) and t.n < MIN_N:
            continue
        value = averaging.omega_average_regrouped(orbit, t, scheme)
        if isinstance(scheme, averaging.Cesaro):
            norm = float(t.n)
        elif isinstance(scheme, averaging.Logarithmic):
            norm = math.log(t.n)
        else:
            norm = (math.fsum(t.eta) if scheme.exact_mass
                    else math.log(math.log(t.n)))
        lines.append(f"{scheme.name},{t.n},{value:.17g},{norm:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweepout(args) -> int:
    try:
        seq = sweepout.sequence_by_name(args.seq, n_cap=args.n_cap)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        cert = sweepout.interval_condition_build(
            seq, n0=args.n0, c=args.C, eps=args.eps, ratio=args.ratio,
            budget_log2=args.budget_log2,
        )
    except sweepout.SweepOutBuildError as exc:
        print(json.dumps({"error": str(exc), "gate": exc.gate}))
        return 1
    except (ValueError, IndexError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cert = sweepout.periodic_witness(cert)
    payload = cert.to_dict()
    checks = sweepout.verify_certificate(cert)
    payload["verified"] = checks["ok"]
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if (cert.witness.verdict and checks["ok"]) else 1


def cmd_maximal(args) -> int:
    try:
        phi = maximal.read_signal(args.phi)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.run_dir:
        loaded = _load_run(args)
        if loaded is None:
            return 2
        _, tables, _ = loaded
    else:
        n_max = args.n_max or 10**5
        if n_max < MIN_N:
            print("error: --n-max too small", file=sys.stderr)
            return 2
        checkpoints = _parse_checkpoints(args.checkpoints, n_max)
        config = SieveConfig(n_max=n_max, block_size=min(1 << 20, n_max),
                             checkpoints=checkpoints)
        acc = stats.WeightAccumulator(config.n_max, config.checkpoints)
        stream_stats(config, [acc], workers=args.workers)
        tables = acc.tables
    cert = maximal.greedy_cover(phi, args.lam, tables)
    result = maximal.weak11_verify(phi, cert)
    payload = {
        "lambda": cert.lam,
        "mass": phi.mass,
        "intervals": [
            {"start": iv.start, "end": iv.end, "witness_n": iv.witness_n}
            for iv in cert.intervals
        ],
        "exceedance": [int(j) for j in cert.exceedance],
        "d_constant": cert.d_constant,
        "verified": result.ok,
        "checks": {k: v for k, v in result.checks.items()},
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if result.ok else 1


def cmd_report(args) -> int:
    loaded = _load_run(args)
    if loaded is None:
        return 2
    _, tables, aux = loaded
    report = stats.asymptotic_report(tables)
    if aux:
        largest_aux = max(aux, key=lambda a: a.n)
        largest = max(tables, key=lambda t: t.n)
        if largest.n >= MIN_N:
            report["clt"] = {
                "n": largest.n,
                "omega": sweepout.clt_standardize("omega", largest, largest.n).distance,
                "little_omega": sweepout.clt_standardize(
                    "little_omega", largest_aux, largest_aux.n).distance,
                "log2_divisors": sweepout.clt_standardize(
                    "log2_divisors", largest_aux, largest_aux.n).distance,
            }
    text = json.dumps(report, indent=2, default=float)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primeomega",
        description="Prime-factor-count sieving and weighted ergodic averaging",
    )
    parser.add_argument("--backend-info", action="store_true",
                        help="print the active kernel lane and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("sieve", help="run the sieve and write checkpoint tables")
    p.add_argument("--n-max", type=_int_arg, required=True)
    p.add_argument("--block-size", type=_int_arg, default=1 << 20)
    p.add_argument("--checkpoints", default="geometric")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-aux", action="store_true")
    p.set_defaults(fn=cmd_sieve)

    p = sub.add_parser("verify", help="check invariants of a run directory")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("average", help="weighted averages over a run's checkpoints")
    p.add_argument("--scheme", required=True,
                   choices=["cesaro", "log", "loglog", "loglog-exact"])
    p.add_argument("--system", required=True)
    p.add_argument("--run-dir", default=None)
    p.add_argument("--n-max", type=_int_arg, default=None)
    p.add_argument("--checkpoints", default="geometric")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_average)

    p = sub.add_parser("sweepout", help="build and verify a sweep-out certificate")
    p.add_argument("--seq", required=True)
    p.add_argument("--C", type=float, default=5.0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--ratio", type=int, default=None)
    p.add_argument("--n0", type=_int_arg, default=1)
    p.add_argument("--budget-log2", type=int, default=4096)
    p.add_argument("--n-cap", type=_int_arg, default=10**6)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sweepout)

    p = sub.add_parser("maximal", help="weak-(1,1) exceedance certificate for a signal")
    p.add_argument("--phi", required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--run-dir", default=None)
    p.add_argument("--n-max", type=_int_arg, default=None)
    p.add_argument("--checkpoints", default="geometric")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_maximal)

    p = sub.add_parser("report", help="asymptotic diagnostics for a run directory")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend_info:
        print(json.dumps({"backend": backend.BACKEND}))
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
