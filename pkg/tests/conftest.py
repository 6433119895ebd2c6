import json
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from primeomega import cli, stats
from primeomega.sieve import SieveConfig, iter_blocks, stream_stats

CACHE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), ".runs-cache")

BIG_N = 10**9
BIG_CHECKPOINTS = tuple(10**k for k in range(2, 10))


@pytest.fixture(scope="session")
def small_tables():
    """In-memory weight tables up to 1e5 at a handful of checkpoints."""
    config = SieveConfig(n_max=10**5, block_size=1 << 16,
                         checkpoints=(16, 100, 1000, 10**4, 10**5))
    acc = stats.WeightAccumulator(config.n_max, config.checkpoints)
    stream_stats(config, [acc], workers=2)
    return acc.tables


@pytest.fixture(scope="session")
def small_aux():
    config = SieveConfig(n_max=10**5, block_size=1 << 16,
                         checkpoints=(16, 100, 1000, 10**4, 10**5))
    aux = stats.AuxAccumulator(config.n_max, config.checkpoints)
    stream_stats(config, [aux], workers=2)
    return aux.tables


@pytest.fixture(scope="session")
def omega_upto_1e6():
    """Omega(n) for n = 1..1e6 as one array (for direct-average oracles)."""
    import numpy as np

    config = SieveConfig(n_max=10**6)
    return np.concatenate([b.omega_big for b in iter_blocks(config, workers=2)])


@pytest.fixture(scope="session")
def big_run_dir():
    """Full run to 1e9 with decade checkpoints, cached across sessions."""
    config = SieveConfig(n_max=BIG_N, checkpoints=BIG_CHECKPOINTS)
    run_dir = os.path.join(CACHE_DIR, stats.run_dir_name(config))
    if not os.path.exists(os.path.join(run_dir, "config.json")):
        os.makedirs(CACHE_DIR, exist_ok=True)
        rc = cli.main([
            "sieve", "--n-max", str(BIG_N), "--checkpoints",
            ",".join(str(c) for c in BIG_CHECKPOINTS),
            "--out-dir", CACHE_DIR, "--workers", "2",
        ])
        assert rc == 0, "big sieve run failed"
    return run_dir


@pytest.fixture(scope="session")
def big_tables(big_run_dir):
    _, tables, _ = stats.load_run(big_run_dir)
    return sorted(tables, key=lambda t: t.n)


@pytest.fixture(scope="session")
def big_aux(big_run_dir):
    _, _, aux = stats.load_run(big_run_dir)
    return sorted(aux, key=lambda a: a.n)


@pytest.fixture(scope="session")
def eta_prime_brackets():
    """eta over primes at every decade checkpoint, one independent pass.

    Cached on disk next to the big run; the pass itself never touches the
    factor-count sieve.
    """
    os.makedirs(CACHE_DIR, exist_ok=True)
    cache = os.path.join(CACHE_DIR, f"eta_primes_{BIG_N}.json")
    cps = [c for c in BIG_CHECKPOINTS if c >= 16]
    if os.path.exists(cache):
        with open(cache) as fh:
            raw = json.load(fh)
        return {int(k): stats.EtaBracket(**v) for k, v in raw.items()}
    brackets = stats.eta_of_primes(BIG_N, checkpoints=cps)
    with open(cache, "w") as fh:
        json.dump({str(k): vars(v) for k, v in brackets.items()}, fh)
    return brackets
