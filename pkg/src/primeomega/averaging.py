"""Averaging schemes, summation by parts, and the exact regrouping identities.

An average of a(1..N) under weight w with normalizer W(N) is
(1/W(N)) * sum w(n) a(n).  The three built-in schemes are Cesaro
(w = 1, W = N), logarithmic (w = 1/n, W = ln N), and double-logarithmic
(w = 1/(n ln n) for n >= 2, W = lnln N nominal or the exact weight mass).

For a(n) = f(T^{Omega(n)} x) the same average regroups exactly into a sum
over k of weight-table entries against f(T^k x); both routes are provided and
must agree to rounding.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import OrbitTable
from .sieve import FactorCountBlock
from .stats import MIN_DOUBLE_LOG_N, WeightTable, require_double_log_domain


class Cesaro:
    name = "cesaro"

    def weights(self, n: int) -> np.ndarray:
        return np.ones(n)

    def normalizer(self, n: int, weights=None) -> float:
        return float(n)


class Logarithmic:
    name = "log"

    def weights(self, n: int) -> np.ndarray:
        return 1.0 / np.arange(1, n + 1, dtype=np.float64)

    def normalizer(self, n: int, weights=None) -> float:
        return math.log(n)


class DoubleLog:
    """w(n) = 1/(n ln n) for n >= 2; the n = 1 term is singular and dropped.

    The nominal normalizer is lnln N; exact_mass=True divides by the true
    weight mass instead, which maps constants to themselves exactly.
    """

    def __init__(self, exact_mass: bool = False):
        self.exact_mass = exact_mass

    @property
    def name(self) -> str:
        return "loglog-exact" if self.exact_mass else "loglog"

    def weights(self, n: int) -> np.ndarray:
        require_double_log_domain(n)
        ns = np.arange(1, n + 1, dtype=np.float64)
        w = np.zeros(n)
        w[1:] = 1.0 / (ns[1:] * np.log(ns[1:]))
        return w

    def normalizer(self, n: int, weights=None) -> float:
        require_double_log_domain(n)
        if self.exact_mass:
            w = weights if weights is not None else self.weights(n)
            return math.fsum(w)
        return math.log(math.log(n))


class CustomWeight:
    """User weight; must be non-negative and non-increasing on [1, N]."""

    name = "custom"

    def __init__(self, fn):
        self.fn = fn

    def weights(self, n: int) -> np.ndarray:
        w = np.array([float(self.fn(m)) for m in range(1, n + 1)])
        if (w < 0).any() or (np.diff(w) > 0).any():
            raise ValueError("custom weight must be non-negative and non-increasing")
        return w

    def normalizer(self, n: int, weights=None) -> float:
        w = weights if weights is not None else self.weights(n)
        return math.fsum(w)


AveragingScheme = Cesaro | Logarithmic | DoubleLog | CustomWeight


def scheme_by_name(name: str) -> "AveragingScheme":
    table = {
        "cesaro": Cesaro,
        "log": Logarithmic,
        "loglog": DoubleLog,
        "loglog-exact": lambda: DoubleLog(exact_mass=True),
    }
    if name not in table:
        raise ValueError(f"unknown scheme {name!r}")
    return table[name]()


def weighted_average(values, scheme: "AveragingScheme") -> float:
    """(1/W(N)) * sum w(n) a(n) for the values a(1..N)."""
    a = np.asarray(values, dtype=np.float64)
    n = len(a)
    if n < 1:
        raise ValueError("need at least one value")
    if not np.isfinite(a).all():
        raise ValueError("values must be finite")
    if isinstance(scheme, Cesaro):
        return float(math.fsum(a) / n)
    w = scheme.weights(n)
    return float(math.fsum(w * a) / scheme.normalizer(n, weights=w))


def sbp_transform(w_values) -> np.ndarray:
    """Summation-by-parts weights: wt(n) = n (w(n) - w(n+1)), wt(N) = N w(N).

    Indices are 1-based over the input array.  The transform preserves the
    total mass exactly in exact arithmetic and keeps non-negativity.
    """
    w = np.asarray(w_values, dtype=np.float64)
    n = len(w)
    if n == 0:
        raise ValueError("empty weight vector")
    if (np.diff(w) > 0).any() or (w < 0).any():
        raise ValueError("weight must be non-negative and non-increasing")
    ns = np.arange(1, n + 1, dtype=np.float64)
    wt = np.empty(n)
    wt[:-1] = ns[:-1] * (w[:-1] - w[1:])
    wt[-1] = n * w[-1]
    return wt


@dataclass
class ConvergenceReport:
    checkpoints: list[int]
    values: list[float]
    tail_min: float
    tail_max: float
    liminf_estimate: float
    limsup_estimate: float


def _make_report(checkpoints, values) -> ConvergenceReport:
    tail = values[len(values) // 2 :]
    return ConvergenceReport(
        checkpoints=list(checkpoints),
        values=list(values),
        tail_min=min(tail),
        tail_max=max(tail),
        liminf_estimate=min(tail),
        limsup_estimate=max(tail),
    )


def weight_domination_demo(values, w_values, checkpoints):
    """Parallel Cesaro and w-average trajectories over the checkpoints.

    ``values`` is a(1..N_last); ``w_values`` the weight on the same range.
    Estimates of liminf/limsup are max/min over the final half of the grid,
    an honest desk-scale surrogate.
    """
    cps = sorted(int(c) for c in checkpoints)
    a = np.asarray(values, dtype=np.float64)
    w = np.asarray(w_values, dtype=np.float64)
    if len(a) < cps[-1] or len(w) < cps[-1]:
        raise ValueError("values shorter than the largest checkpoint")
    sbp_transform(w[: cps[-1]])  # admissibility check
    cesaro_vals = []
    weighted_vals = []
    for c in cps:
        cesaro_vals.append(float(a[:c].sum()) / c)
        weighted_vals.append(float(np.dot(w[:c], a[:c])) / math.fsum(w[:c]))
    return _make_report(cps, cesaro_vals), _make_report(cps, weighted_vals)


def omega_average_regrouped(orbit: OrbitTable, table: WeightTable,
                            scheme: "AveragingScheme") -> float:
    """Weighted Omega-average evaluated as a k-sum against the weight table."""
    if orbit.k_max < table.k_max:
        raise ValueError("orbit too short for the table")
    f = orbit.values[: table.k_max + 1]
    if isinstance(scheme, Cesaro):
        return float(math.fsum(table.pi * f) / table.n)
    if isinstance(scheme, Logarithmic):
        return float(math.fsum(table.xi * f) / math.log(table.n))
    if isinstance(scheme, DoubleLog):
        require_double_log_domain(table.n)
        norm = math.fsum(table.eta) if scheme.exact_mass else math.log(math.log(table.n))
        return float(math.fsum(table.eta * f) / norm)
    raise ValueError("scheme does not match a weight-table column")


def omega_average_direct(orbit: OrbitTable, omega_source, scheme: "AveragingScheme",
                         n: int) -> float:
    """Direct pass: (1/W(N)) * sum w(m) f(T^{Omega(m)} x) over m <= N.

    ``omega_source`` is an ndarray of Omega values for m = 1..N or an iterable
    of FactorCountBlocks covering [1, N].  Oracle route for the regrouping
    identity.
    """
    if isinstance(scheme, DoubleLog):
        require_double_log_domain(n)
    elif not isinstance(scheme, (Cesaro, Logarithmic)):
        raise ValueError("scheme does not match a weight-table column")
    f = np.zeros(64)
    f[: orbit.k_max + 1] = orbit.values

    def block_sums():
        if isinstance(omega_source, np.ndarray):
            yield 1, omega_source[:n]
            return
        for block in omega_source:
            if block.lo > n:
                return
            stop = min(block.hi, n + 1)
            yield block.lo, block.omega_big[: stop - block.lo]

    partials = []
    mass_partials = []
    for lo, om in block_sums():
        hi = lo + len(om)
        vals = f[om.astype(np.int64)]
        ms = np.arange(lo, hi, dtype=np.float64)
        if isinstance(scheme, Cesaro):
            w = np.ones(len(om))
        elif isinstance(scheme, Logarithmic):
            w = 1.0 / ms
        else:
            w = np.zeros(len(om))
            nz = ms >= 2
            w[nz] = 1.0 / (ms[nz] * np.log(ms[nz]))
        partials.append(float(np.dot(w, vals)))
        mass_partials.append(float(w.sum()))
    num = math.fsum(partials)
    if isinstance(scheme, Cesaro):
        return num / n
    if isinstance(scheme, Logarithmic):
        return num / math.log(n)
    norm = math.fsum(mass_partials) if scheme.exact_mass else math.log(math.log(n))
    return num / norm


def lacunary_checkpoints(rho: float, cap: int):
    """Doubly exponential grid floor(2^(2^(rho^i))) up to cap.

    Returns (values, first_overflow_index): all fitting N_i ascending plus the
    first index whose value exceeds cap.
    """
    if rho <= 1:
        raise ValueError("rho must be > 1")
    out = []
    i = 1
    while True:
        exponent = 2.0 ** (rho**i)
        if exponent > math.log2(cap) + 1:
            return out, i
        value = int(math.floor(2.0**exponent))
        if value > cap:
            return out, i
        if not out or value > out[-1]:
            out.append(value)
        i += 1


def geometric_checkpoints(n_max: int, start: int = 100, ratio: float = 10**0.25):
    """Geometric grid from start to n_max, deduplicated to integers >= 16."""
    out = []
    x = float(start)
    while x <= n_max:
        v = int(round(x))
        if v >= MIN_DOUBLE_LOG_N and v <= n_max and (not out or v > out[-1]):
            out.append(v)
        x *= ratio
    if out and out[-1] != n_max and n_max >= MIN_DOUBLE_LOG_N:
        out.append(n_max)
    return out
