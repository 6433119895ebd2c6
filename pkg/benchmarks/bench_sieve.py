#!/usr/bin/env python3
"""Benchmark the compiled sieve/accumulator lane against the numpy fallback.

Usage: python benchmarks/bench_sieve.py [--n-max 2e7] [--block-size 1048576]
"""

import argparse
import math
import time

import numpy as np

from primeomega import _slowcore
from primeomega.sieve import base_primes

try:
    from primeomega import _fastcore
except ImportError:
    _fastcore = None


def bench_lane(lane, n_max: int, block_size: int) -> dict:
    primes = np.ascontiguousarray(base_primes(math.isqrt(n_max)), dtype=np.int64)
    kcap = n_max.bit_length()
    stats_core = lane.StatsCore(kcap)
    aux_core = lane.AuxCore(kcap, 1 << 13)
    ob = np.zeros(block_size, dtype=np.uint8)
    os_ = np.zeros(block_size, dtype=np.uint8)
    dv = np.zeros(block_size, dtype=np.int64)
    sieve_s = accum_s = 0.0
    lo = 1
    while lo <= n_max:
        hi = min(lo + block_size, n_max + 1)
        t0 = time.perf_counter()
        lane.sieve_block_fill(lo, hi, primes, ob, os_, dv)
        t1 = time.perf_counter()
        stats_core.feed(lo, lo, hi, ob)
        aux_core.feed(lo, lo, hi, os_, dv)
        t2 = time.perf_counter()
        sieve_s += t1 - t0
        accum_s += t2 - t1
        lo = hi
    pi, xi, eta = stats_core.snapshot()
    return {
        "sieve_s": sieve_s,
        "accum_s": accum_s,
        "total_s": sieve_s + accum_s,
        "mn_per_s": n_max / (sieve_s + accum_s) / 1e6,
        "checksum": int(pi.sum()),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-max", type=float, default=2e7)
    ap.add_argument("--block-size", type=int, default=1 << 20)
    args = ap.parse_args()
    n_max = int(args.n_max)

    lanes = [("python", _slowcore)]
    if _fastcore is not None:
        lanes.insert(0, ("cython", _fastcore))

    print(f"sieve + accumulate to n_max={n_max:.0e}, block={args.block_size}")
    print(f"{'lane':<8} {'sieve s':>9} {'accum s':>9} {'total s':>9} {'Mn/s':>8}")
    results = {}
    for name, lane in lanes:
        r = bench_lane(lane, n_max, min(args.block_size, n_max))
        results[name] = r
        print(f"{name:<8} {r['sieve_s']:>9.3f} {r['accum_s']:>9.3f} "
              f"{r['total_s']:>9.3f} {r['mn_per_s']:>8.1f}")
    if len(results) == 2:
        speedup = results["python"]["total_s"] / results["cython"]["total_s"]
        print(f"compiled speedup: {speedup:.1f}x")
        assert results["python"]["checksum"] == results["cython"]["checksum"]


if __name__ == "__main__":
    main()
