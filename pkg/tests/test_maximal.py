import math
import random

import numpy as np
import pytest

from oracles import brute_maximal_value
from primeomega.maximal import (
    FiniteSignal,
    exceedance_set,
    greedy_cover,
    maximal_value,
    read_signal,
    weak11_verify,
    window_length,
)


@pytest.fixture(scope="module")
def grid(small_tables):
    return [t for t in small_tables if t.n >= 16]


def spike(position, height=1.0):
    return FiniteSignal(offset=position, values=np.array([height]))


def random_dyadic_signal(rng, max_mass=64.0):
    length = rng.randrange(1, 30)
    vals = np.array([rng.randrange(0, 256) / 64.0 for _ in range(length)])
    if vals.sum() > max_mass:
        vals = vals * (max_mass / vals.sum())
        vals = np.floor(vals * 64.0) / 64.0
    return FiniteSignal(offset=rng.randrange(-50, 50), values=vals)


class TestMaximalValue:
    def test_zero_signal(self, grid):
        phi = FiniteSignal(offset=0, values=np.zeros(5))
        for j in (-10, 0, 3):
            assert maximal_value(phi, j, grid) == 0.0

    def test_unit_spike_enumeration_value(self, grid):
        # at j = s-1 only k=1 hits the spike; the best grid point is N=16
        # where eta_16(1)/lnln16 comes straight from the primes below 16
        phi = spike(40)
        eta16 = math.fsum(1.0 / (p * math.log(p)) for p in (2, 3, 5, 7, 11, 13))
        expected = eta16 / math.log(math.log(16))
        assert maximal_value(phi, 39, grid) == pytest.approx(expected, rel=1e-12)
        assert maximal_value(phi, 39, grid) == pytest.approx(1.2653140289, rel=1e-9)

    def test_disjoint_window_is_zero(self, grid):
        phi = spike(1000)
        l_max = max(window_length(t.n) for t in grid)
        assert maximal_value(phi, 1000 - l_max - 1, grid) == 0.0
        assert maximal_value(phi, 1000, grid) == 0.0  # k starts at 1

    def test_matches_brute_oracle(self, grid):
        rng = random.Random(5)
        for _ in range(20):
            phi = random_dyadic_signal(rng)
            pairs = {phi.offset + i: float(v) for i, v in enumerate(phi.values)}
            j = rng.randrange(phi.offset - 8, phi.offset + len(phi.values))
            assert maximal_value(phi, j, grid) == pytest.approx(
                brute_maximal_value(pairs, j, grid), rel=1e-12
            )

    def test_monotone_in_phi(self, grid):
        rng = random.Random(9)
        phi = random_dyadic_signal(rng)
        bigger = FiniteSignal(offset=phi.offset, values=phi.values + 0.25)
        for j in range(phi.offset - 6, phi.offset + len(phi.values)):
            assert maximal_value(bigger, j, grid) >= maximal_value(phi, j, grid)

    def test_translation_equivariance(self, grid):
        rng = random.Random(13)
        phi = random_dyadic_signal(rng)
        shifted = FiniteSignal(offset=phi.offset + 17, values=phi.values)
        for j in range(phi.offset - 6, phi.offset + len(phi.values)):
            assert maximal_value(shifted, j + 17, grid) == maximal_value(phi, j, grid)

    def test_positive_scaling(self, grid):
        rng = random.Random(17)
        phi = random_dyadic_signal(rng)
        scaled = FiniteSignal(offset=phi.offset, values=4.0 * phi.values)
        for j in range(phi.offset - 6, phi.offset + len(phi.values)):
            assert maximal_value(scaled, j, grid) == pytest.approx(
                4.0 * maximal_value(phi, j, grid), rel=1e-12
            )

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            maximal_value(spike(0), 0, [])


class TestExceedance:
    def test_zero_signal_empty(self, grid):
        phi = FiniteSignal(offset=0, values=np.zeros(3))
        assert len(exceedance_set(phi, 1.0, grid)) == 0

    def test_spike_high_threshold_empty(self, grid):
        eta1_upper = float(grid[-1].eta[1]) + 2.0 / math.log(grid[-1].n)
        assert len(exceedance_set(spike(10), 10.0 * eta1_upper, grid)) == 0

    def test_scaling_identity(self, grid):
        rng = random.Random(23)
        phi = random_dyadic_signal(rng)
        scaled = FiniteSignal(offset=phi.offset, values=2.0 * phi.values)
        e1 = exceedance_set(phi, 0.75, grid)
        e2 = exceedance_set(scaled, 1.5, grid)
        assert np.array_equal(e1, e2)

    def test_random_mass8_bound(self, grid):
        rng = random.Random(31)
        eta1_upper = float(grid[-1].eta[1]) + 2.0 / math.log(grid[-1].n)
        for _ in range(20):
            phi = random_dyadic_signal(rng, max_mass=8.0)
            exc = exceedance_set(phi, 1.0, grid)
            assert len(exc) <= 2.0 * eta1_upper * phi.mass
            assert len(exc) <= 27


class TestGreedyCover:
    def test_zero_signal_empty_certificate(self, grid):
        phi = FiniteSignal(offset=0, values=np.zeros(3))
        cert = greedy_cover(phi, 1.0, grid)
        assert cert.intervals == [] and len(cert.exceedance) == 0
        assert weak11_verify(phi, cert).ok

    def test_spike_single_interval(self, grid):
        phi = spike(25)
        cert = greedy_cover(phi, 1.0, grid)
        assert len(cert.intervals) <= 1
        res = weak11_verify(phi, cert)
        assert res.ok
        assert len(cert.exceedance) <= 3  # 2 * eta(1) upper * mass 1 < 4

    def test_hundred_random_signals_all_verify(self, grid):
        rng = random.Random(41)
        for _ in range(100):
            phi = random_dyadic_signal(rng)
            cert = greedy_cover(phi, 1.0, grid)
            res = weak11_verify(phi, cert)
            assert res.ok, res.checks

    def test_adversarial_concentrated_mass(self, grid):
        l_max = max(window_length(t.n) for t in grid)
        vals = np.full(l_max + 1, 64.0 / (l_max + 1))
        phi = FiniteSignal(offset=0, values=np.floor(vals * 64) / 64)
        cert = greedy_cover(phi, 1.0, grid)
        assert weak11_verify(phi, cert).ok

    def test_intervals_disjoint_and_cover(self, grid):
        rng = random.Random(47)
        phi = FiniteSignal.from_pairs(
            [(rng.randrange(-40, 40), rng.randrange(1, 64) / 8.0) for _ in range(12)]
        )
        cert = greedy_cover(phi, 1.0, grid)
        ivs = sorted(cert.intervals, key=lambda iv: iv.start)
        assert all(a.end < b.start for a, b in zip(ivs, ivs[1:]))
        for j in cert.exceedance:
            assert any(iv.start <= j <= iv.end for iv in ivs)


class TestSignalIo:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("# test signal\n5 0.5\n7 1.25\n3 0.125\n")
        phi = read_signal(str(path))
        assert phi.offset == 3
        assert phi.value(3) == 0.125 and phi.value(7) == 1.25 and phi.value(4) == 0.0
        assert phi.mass == 1.875

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            FiniteSignal(offset=0, values=np.array([-1.0]))
