"""Streaming segmented sieve for Omega(n), omega(n), and d(n) over [1, n_max].

Blocks may be sieved by several worker threads; delivery to consumers is
serialized in ascending block order through a bounded reorder window, so the
pipeline output is deterministic regardless of the worker count.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend

DEFAULT_BLOCK_SIZE = 1 << 20
# exact fixed-point accumulation of 1/(n ln n) needs terms >= 2**-48
MAX_N = 10**12


class SieveError(RuntimeError):
    pass


def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending.  limit < 2 gives an empty array."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def factor_counts_naive(n: int) -> tuple[int, int, int]:
    """(Omega, omega, d) by trial division.  Test oracle; never used by the sieve."""
    if n < 1:
        raise ValueError("n must be positive")
    big = small = 0
    div = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            big += e
            small += 1
            div *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        big += 1
        small += 1
        div *= 2
    return big, small, div


@dataclass(frozen=True)
class SieveConfig:
    n_max: int
    block_size: int | None = None  # None: min(DEFAULT_BLOCK_SIZE, n_max)
    checkpoints: tuple[int, ...] = ()

    def __post_init__(self):
        if not 2 <= self.n_max <= MAX_N:
            raise ValueError(f"n_max must be in [2, {MAX_N}]")
        if self.block_size is None:
            object.__setattr__(self, "block_size", min(DEFAULT_BLOCK_SIZE, self.n_max))
        if not 2 <= self.block_size <= self.n_max:
            raise ValueError("block_size must be in [2, n_max]")
        if self.block_size > (1 << 25):
            # keeps the fallback lane's bucketed reduction exact
            raise ValueError("block_size above 2**25 is not supported")
        cps = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if list(cps) != sorted(set(cps)):
            raise ValueError("checkpoints must be strictly increasing")
        for c in cps:
            if not 16 <= c <= self.n_max:
                raise ValueError("checkpoints must lie in [16, n_max]")


@dataclass
class FactorCountBlock:
    """Factor counts for the half-open range [lo, hi)."""

    lo: int
    hi: int
    omega_big: np.ndarray  # uint8
    omega_small: np.ndarray  # uint8
    divisors: np.ndarray  # int64


def sieve_block(lo: int, hi: int, primes, primes_limit: int | None = None) -> FactorCountBlock:
    """Exact factor counts on [lo, hi); primes must be complete to isqrt(hi-1)."""
    if not 1 <= lo < hi:
        raise ValueError("need 1 <= lo < hi")
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    need = math.isqrt(hi - 1)
    covered = primes_limit if primes_limit is not None else (
        int(primes[-1]) if len(primes) else 1
    )
    if covered < need:
        raise SieveError(
            f"insufficient base primes: need coverage to {need}, have {covered}"
        )
    count = hi - lo
    omega_big = np.zeros(count, dtype=np.uint8)
    omega_small = np.zeros(count, dtype=np.uint8)
    divisors = np.zeros(count, dtype=np.int64)
    backend.sieve_block_fill(lo, hi, primes, omega_big, omega_small, divisors)
    return FactorCountBlock(lo, hi, omega_big, omega_small, divisors)


def iter_blocks(config: SieveConfig, workers: int = 1):
    """Yield FactorCountBlocks covering [1, n_max] in ascending order."""
    limit = math.isqrt(config.n_max)
    primes = base_primes(limit)
    bounds = []
    lo = 1
    while lo <= config.n_max:
        hi = min(lo + config.block_size, config.n_max + 1)
        bounds.append((lo, hi))
        lo = hi
    if workers <= 1:
        for lo, hi in bounds:
            yield sieve_block(lo, hi, primes, primes_limit=limit)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = {}
        submitted = 0
        delivered = 0
        window = 2 * workers
        while delivered < len(bounds):
            while submitted < len(bounds) and submitted - delivered < window:
                lo, hi = bounds[submitted]
                pending[submitted] = pool.submit(
                    sieve_block, lo, hi, primes, limit
                )
                submitted += 1
            yield pending.pop(delivered).result()
            delivered += 1


@dataclass
class StreamReport:
    n_max: int
    blocks: int
    workers: int
    backend: str
    seconds: float
    consumers: tuple[str, ...] = field(default_factory=tuple)


def stream_stats(config: SieveConfig, consumers, workers: int = 1) -> StreamReport:
    """Deliver every block in [1, n_max] to each consumer exactly once, in order."""
    t0 = time.perf_counter()
    nblocks = 0
    for block in iter_blocks(config, workers=workers):
        nblocks += 1
        for consumer in consumers:
            try:
                consumer.consume(block)
            except Exception as exc:
                raise SieveError(
                    f"consumer {type(consumer).__name__} failed on block "
                    f"[{block.lo}, {block.hi}): {exc}"
                ) from exc
    for consumer in consumers:
        fin = getattr(consumer, "finalize", None)
        if fin is not None:
            fin()
    return StreamReport(
        n_max=config.n_max,
        blocks=nblocks,
        workers=workers,
        backend=backend.BACKEND,
        seconds=time.perf_counter() - t0,
        consumers=tuple(type(c).__name__ for c in consumers),
    )
