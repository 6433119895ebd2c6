import math
import random

import numpy as np
import pytest

from oracles import primes_upto, trial_omega
from primeomega import stats
from primeomega.sieve import (
    SieveConfig,
    SieveError,
    base_primes,
    factor_counts_naive,
    iter_blocks,
    sieve_block,
    stream_stats,
)


def test_base_primes_small():
    assert base_primes(10).tolist() == [2, 3, 5, 7]
    assert base_primes(2).tolist() == [2]
    assert base_primes(1).tolist() == []


def test_base_primes_vs_trial_oracle():
    assert len(base_primes(100)) == 25
    assert base_primes(541).tolist() == primes_upto(541)


def test_factor_counts_naive_examples():
    assert factor_counts_naive(12) == (3, 2, 6)
    assert factor_counts_naive(2**20) == (20, 1, 21)
    assert factor_counts_naive(9699690) == (8, 8, 256)
    assert factor_counts_naive(1) == (0, 0, 1)
    with pytest.raises(ValueError):
        factor_counts_naive(0)


def test_sieve_block_360():
    block = sieve_block(300, 400, base_primes(20), primes_limit=20)
    i = 360 - 300
    assert (block.omega_big[i], block.omega_small[i], block.divisors[i]) == (6, 3, 24)


def test_sieve_block_n1():
    block = sieve_block(1, 2, base_primes(2), primes_limit=2)
    assert (block.omega_big[0], block.omega_small[0], block.divisors[0]) == (0, 0, 1)


def test_sieve_block_10_20():
    block = sieve_block(10, 20, base_primes(5), primes_limit=5)
    assert block.omega_big.tolist() == [2, 1, 3, 1, 2, 2, 4, 1, 3, 1]
    for n in range(10, 20):
        assert tuple(
            int(a[n - 10]) for a in (block.omega_big, block.omega_small, block.divisors)
        ) == trial_omega(n)


def test_sieve_block_insufficient_primes():
    with pytest.raises(SieveError, match="insufficient base primes"):
        sieve_block(1, 100, np.array([2, 3], dtype=np.int64), primes_limit=3)


def test_sieve_matches_trial_oracle_to_2e4():
    limit = math.isqrt(20000)
    block = sieve_block(1, 20001, base_primes(limit), primes_limit=limit)
    for n in range(1, 20001):
        expected = trial_omega(n)
        got = (
            int(block.omega_big[n - 1]),
            int(block.omega_small[n - 1]),
            int(block.divisors[n - 1]),
        )
        assert got == expected, n


def test_block_invariants_divisor_bounds():
    limit = math.isqrt(50000)
    block = sieve_block(1, 50001, base_primes(limit), primes_limit=limit)
    small = block.omega_small.astype(np.int64)
    big = block.omega_big.astype(np.int64)
    d = block.divisors
    assert (2.0**small <= d).all() and (d <= 2.0**big).all()
    ns = np.arange(1, 50001)
    assert (big <= np.floor(np.log2(ns) + 1e-12)).all()
    assert (big == 0).sum() == 1 and big[0] == 0


def test_complete_additivity_random_pairs():
    rng = random.Random(7)
    limit = math.isqrt(10**6)
    block = sieve_block(1, 10**6 + 1, base_primes(limit), primes_limit=limit)
    om = block.omega_big
    for _ in range(500):
        m = rng.randrange(2, 1000)
        n = rng.randrange(2, 1000)
        assert int(om[m * n - 1]) == int(om[m - 1]) + int(om[n - 1])


def test_prime_count_1e6():
    config = SieveConfig(n_max=10**6)
    count = sum(int((b.omega_big == 1).sum()) for b in iter_blocks(config, workers=2))
    assert count == len(base_primes(10**6)) == 78498


def test_checkpoint_emissions_in_order():
    config = SieveConfig(n_max=2000, block_size=300, checkpoints=(100, 1000))
    acc = stats.WeightAccumulator(config.n_max, config.checkpoints)
    stream_stats(config, [acc])
    assert [t.n for t in acc.tables] == [100, 1000]


def test_stream_deterministic_across_blocks_and_workers():
    snaps = []
    for block_size, workers in ((1 << 14, 1), (9973, 2), (30000, 3)):
        config = SieveConfig(n_max=60000, block_size=block_size, checkpoints=(60000,))
        acc = stats.WeightAccumulator(config.n_max, config.checkpoints)
        stream_stats(config, [acc], workers=workers)
        snaps.append(acc.snapshot())
    for other in snaps[1:]:
        assert np.array_equal(snaps[0][0], other[0])
        assert list(snaps[0][1]) == list(other[1])
        assert list(snaps[0][2]) == list(other[2])


def test_out_of_order_block_aborts():
    config = SieveConfig(n_max=5000, block_size=1000)
    acc = stats.WeightAccumulator(config.n_max)
    blocks = list(iter_blocks(config))
    acc.consume(blocks[0])
    with pytest.raises(RuntimeError, match="out-of-order"):
        acc.consume(blocks[2])


def test_consumer_failure_names_block_range():
    class Exploder:
        def consume(self, block):
            raise ValueError("boom")

    config = SieveConfig(n_max=100, block_size=50)
    with pytest.raises(SieveError, match=r"\[1, 51\)"):
        stream_stats(config, [Exploder()])


def test_config_validation():
    with pytest.raises(ValueError):
        SieveConfig(n_max=1)
    with pytest.raises(ValueError):
        SieveConfig(n_max=100, block_size=1)
    with pytest.raises(ValueError):
        SieveConfig(n_max=100, block_size=200)
    with pytest.raises(ValueError):
        SieveConfig(n_max=100, checkpoints=(10,))
    with pytest.raises(ValueError):
        SieveConfig(n_max=100, checkpoints=(50, 20))
    cfg = SieveConfig(n_max=100, checkpoints=(16, 100))
    assert cfg.checkpoints == (16, 100)
