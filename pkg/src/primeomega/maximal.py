"""Integer-side maximal operator for the double-log weights, with certificates.

For a finitely supported phi >= 0 the operator at j is

    sup over N of (1/lnln N) * sum_{1 <= k <= 2 lnln N} eta_N(k) phi(j + k),

realized here as a max over a finite checkpoint grid of weight tables (a lower
bound on the full sup, so a verified exceedance-set bound is the sound
direction).  The greedy cover picks the minimal exceeding j, certifies it with
a witness N and the interval [j, j + floor(2 lnln N)], removes the interval,
and repeats; the certificate is checked independently afterwards.
"""

import math
from dataclasses import dataclass

import numpy as np

from .stats import WeightTable, loglog, require_double_log_domain


@dataclass
class FiniteSignal:
    """Non-negative finitely supported weights phi(j0), phi(j0+1), ...

    Dyadic-rational values keep the l1 mass exact in floating point.
    """

    offset: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if (self.values < 0).any():
            raise ValueError("signal must be non-negative")

    @property
    def mass(self) -> float:
        return math.fsum(self.values)

    def value(self, j: int) -> float:
        i = j - self.offset
        if 0 <= i < len(self.values):
            return float(self.values[i])
        return 0.0

    @classmethod
    def from_pairs(cls, pairs):
        pairs = sorted(pairs)
        lo = pairs[0][0]
        hi = pairs[-1][0]
        vals = np.zeros(hi - lo + 1)
        for j, v in pairs:
            vals[j - lo] += v
        return cls(offset=lo, values=vals)


def window_length(n: int) -> int:
    """floor(2 lnln N): the k-window of the maximal operator at scale N."""
    require_double_log_domain(n)
    return int(2.0 * loglog(n))


def _check_tables(tables) -> list[WeightTable]:
    tables = sorted(tables, key=lambda t: t.n)
    if not tables:
        raise ValueError("empty checkpoint grid")
    for t in tables:
        require_double_log_domain(t.n)
    return tables


def maximal_value(phi: FiniteSignal, j: int, tables) -> float:
    """Max over the table grid of the windowed eta-average of phi at j."""
    tables = _check_tables(tables)
    best = 0.0
    for t in tables:
        ll = loglog(t.n)
        l_n = min(window_length(t.n), t.k_max)
        s = math.fsum(t.eta[k] * phi.value(j + k) for k in range(1, l_n + 1))
        best = max(best, s / ll)
    return best


def exceedance_set(phi: FiniteSignal, lam: float, tables) -> np.ndarray:
    """All j with maximal value > lam, scanned exactly over the relevant range."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    tables = _check_tables(tables)
    if not phi.values.any():
        return np.zeros(0, dtype=np.int64)
    l_max = max(window_length(t.n) for t in tables)
    lo = phi.offset - l_max
    hi = phi.offset + len(phi.values) - 1
    out = [j for j in range(lo, hi) if maximal_value(phi, j, tables) > lam]
    return np.asarray(out, dtype=np.int64)


@dataclass
class CoverInterval:
    start: int
    end: int  # inclusive: [start, start + floor(2 lnln N)]
    witness_n: int


@dataclass
class CoverCertificate:
    lam: float
    intervals: list[CoverInterval]
    exceedance: np.ndarray
    d_constant: float  # the bound multiplier in #E <= d * mass / lam


def greedy_cover(phi: FiniteSignal, lam: float, tables,
                 eta1_upper: float | None = None) -> CoverCertificate:
    """Minimal-element greedy interval cover of the exceedance set."""
    tables = _check_tables(tables)
    exc = exceedance_set(phi, lam, tables)
    remaining = [int(j) for j in exc]
    intervals: list[CoverInterval] = []
    while remaining:
        j = remaining[0]
        witness = None
        best = 0.0
        for t in tables:
            ll = loglog(t.n)
            l_n = min(window_length(t.n), t.k_max)
            s = math.fsum(t.eta[k] * phi.value(j + k) for k in range(1, l_n + 1))
            if s / ll > lam and s / ll > best:
                witness = t.n
                best = s / ll
        if witness is None:
            raise RuntimeError(
                f"greedy cover inconsistency: j={j} exceeds but has no witness"
            )
        end = j + window_length(witness)
        intervals.append(CoverInterval(start=j, end=end, witness_n=witness))
        remaining = [r for r in remaining if r > end]
    if eta1_upper is None:
        largest = max(tables, key=lambda t: t.n)
        eta1_upper = float(largest.eta[1]) + 2.0 / math.log(largest.n)
    return CoverCertificate(
        lam=lam, intervals=intervals, exceedance=exc, d_constant=2.0 * eta1_upper
    )


@dataclass
class VerifyResult:
    ok: bool
    checks: dict

    def __bool__(self) -> bool:
        return self.ok


def weak11_verify(phi: FiniteSignal, cert: CoverCertificate) -> VerifyResult:
    """Check disjointness, coverage, and #E <= d * mass / lambda."""
    checks = {}
    ivs = sorted(cert.intervals, key=lambda iv: iv.start)
    disjoint = all(a.end < b.start for a, b in zip(ivs, ivs[1:]))
    checks["intervals_disjoint"] = disjoint
    covered = all(
        any(iv.start <= j <= iv.end for iv in ivs) for j in cert.exceedance
    )
    checks["exceedance_covered"] = covered
    bound = cert.d_constant * phi.mass / cert.lam
    checks["count_bound"] = len(cert.exceedance) <= bound
    checks["exceedance_count"] = len(cert.exceedance)
    checks["bound_value"] = bound
    ok = disjoint and covered and checks["count_bound"]
    return VerifyResult(ok=ok, checks=checks)


def read_signal(path: str) -> FiniteSignal:
    """Two-column text file: offset and value per line."""
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            j, v = line.split()
            pairs.append((int(j), float(v)))
    if not pairs:
        raise ValueError(f"no signal entries in {path}")
    return FiniteSignal.from_pairs(pairs)
