"""Constructive sweeping-out machinery for slow integer sequences.

Certificates follow the interval condition: checkpoints N_i on a geometric
grid, intervals J_i that each capture a (1-eps) fraction of {a_n : n <= N_i},
and a cover ratio |union J_i| / max |J_i| exceeding the target constant.  A
completed certificate carries a periodic-shift witness: on Z/(2L+1) with
target set E = [-M, M], more than D |E| residues see a windowed hit fraction
above 1 - eps, which is exactly the failure of a maximal inequality at
constant D.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .sieve import SieveConfig, factor_counts_naive, iter_blocks
from .stats import AuxTable, WeightTable, loglog, standardized_sup_distance

_MAX_SEARCH_EXP = 1 << 17  # cap for first_at_least exponent doubling


class SweepOutBuildError(RuntimeError):
    def __init__(self, gate: str, message: str):
        super().__init__(f"[{gate}] {message}")
        self.gate = gate


# ---------------------------------------------------------------------------
# integer sequences
# ---------------------------------------------------------------------------


class IntegerSequence:
    """Non-negative integer sequence indexed from n = 1."""

    name = "abstract"
    monotone = False

    def value(self, n: int) -> int:
        raise NotImplementedError

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        """Values for n in [lo, hi) as int64; vector twin of value()."""
        return np.array([self.value(n) for n in range(lo, hi)], dtype=np.int64)

    def first_at_least(self, v: int) -> int:
        """Minimal n with a_n >= v (monotone sequences only)."""
        if not self.monotone:
            raise ValueError(f"{self.name} is not monotone")
        if self.value(1) >= v:
            return 1
        e = 1
        while self.value(1 << e) < v:
            e *= 2
            if e > _MAX_SEARCH_EXP:
                raise OverflowError(f"{self.name} never reaches {v} in search range")
        lo, hi = 1, 1 << e
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.value(mid) >= v:
                hi = mid
            else:
                lo = mid
        return hi

    def count_in_range(self, n: int, lo: int, hi: int) -> int:
        """#{m <= n : lo <= a_m <= hi}, exact."""
        if hi < lo or n < 1:
            return 0
        if self.monotone:
            below_hi = min(n, self.first_at_least(hi + 1) - 1)
            below_lo = min(n, self.first_at_least(lo) - 1)
            return max(0, below_hi - below_lo)
        vals = self.chunk_values(1, n + 1)
        return int(((vals >= lo) & (vals <= hi)).sum())


class FloorLog2Seq(IntegerSequence):
    name = "floor_log2"
    monotone = True

    def value(self, n: int) -> int:
        return n.bit_length() - 1

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        _, e = np.frexp(np.arange(lo, hi, dtype=np.float64))
        return (e - 1).astype(np.int64)

    def first_at_least(self, v: int) -> int:
        return 1 if v <= 0 else 1 << v


class FloorLogLogSeq(IntegerSequence):
    """floor(lnln n), clamped to 0 below n = 3 where the value is negative."""

    name = "floor_loglog"
    monotone = True

    def value(self, n: int) -> int:
        if n < 3:
            return 0
        return max(0, math.floor(math.log(math.log(n))))

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        ns = np.arange(lo, hi, dtype=np.float64)
        out = np.zeros(hi - lo, dtype=np.int64)
        ok = ns >= 3
        out[ok] = np.maximum(0, np.floor(np.log(np.log(ns[ok])))).astype(np.int64)
        return out


class FloorLogPowSeq(IntegerSequence):
    """floor((ln n)^c) for a fixed power c > 0."""

    monotone = True

    def __init__(self, c: float):
        if c <= 0:
            raise ValueError("power must be positive")
        self.c = c
        self.name = f"floor_log_pow({c:g})"

    def value(self, n: int) -> int:
        if n < 2:
            return 0
        return math.floor(math.log(n) ** self.c)

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        ns = np.arange(lo, hi, dtype=np.float64)
        out = np.zeros(hi - lo, dtype=np.int64)
        ok = ns >= 2
        out[ok] = np.floor(np.log(ns[ok]) ** self.c).astype(np.int64)
        return out


class LacunarySeq(IntegerSequence):
    """a_n = base**n; the canonical fast-growing comparison sequence."""

    monotone = True

    def __init__(self, base: int):
        if base < 2:
            raise ValueError("base must be >= 2")
        self.base = base
        self.name = f"lacunary({base})"

    def value(self, n: int) -> int:
        if n * math.log2(self.base) > 1 << 18:
            raise OverflowError(f"lacunary value at n={n} exceeds 2^(2^18)")
        return self.base**n

    def first_at_least(self, v: int) -> int:
        if v <= self.base:
            return 1
        n = max(1, math.floor(math.log(v) / math.log(self.base)) - 1)
        while self.base**n < v:
            n += 1
        return n


class IdentitySeq(IntegerSequence):
    name = "identity"
    monotone = True

    def value(self, n: int) -> int:
        return n

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        return np.arange(lo, hi, dtype=np.int64)

    def first_at_least(self, v: int) -> int:
        return max(1, v)


class FileBackedSeq(IntegerSequence):
    """Sequence loaded from a two-column file (n, a_n), contiguous from n=1."""

    def __init__(self, path: str):
        self.name = f"file({path})"
        entries = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                n_str, v_str = line.split()
                entries[int(n_str)] = int(v_str)
        if not entries or sorted(entries) != list(range(1, len(entries) + 1)):
            raise ValueError(f"{path} must cover n = 1..N contiguously")
        self._values = np.array([entries[n] for n in sorted(entries)], dtype=np.int64)
        if (self._values < 0).any():
            raise ValueError("sequence values must be non-negative")
        self.monotone = bool((np.diff(self._values) >= 0).all())

    def value(self, n: int) -> int:
        if not 1 <= n <= len(self._values):
            raise IndexError(f"n={n} outside file-backed range")
        return int(self._values[n - 1])

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        if hi - 1 > len(self._values):
            raise IndexError("range outside file-backed sequence")
        return self._values[lo - 1 : hi - 1]


class SieveBackedSeq(IntegerSequence):
    """omega / little_omega / log2_divisors, backed by streamed sieve blocks.

    Values are materialized lazily up to n_cap; spot values use trial division.
    """

    monotone = False

    def __init__(self, kind: str, n_cap: int = 10**6, block_size: int = 1 << 20):
        if kind not in ("omega", "little_omega", "log2_divisors"):
            raise ValueError(f"unknown sieve-backed sequence {kind!r}")
        self.kind = kind
        self.name = kind
        self.n_cap = n_cap
        self._block_size = min(block_size, n_cap)
        self._values: np.ndarray | None = None
        self._prefix_cache: dict[int, np.ndarray] = {}

    def _materialize(self) -> np.ndarray:
        if self._values is None:
            config = SieveConfig(n_max=self.n_cap, block_size=self._block_size)
            chunks = []
            for block in iter_blocks(config, workers=2):
                if self.kind == "omega":
                    chunks.append(block.omega_big.copy())
                elif self.kind == "little_omega":
                    chunks.append(block.omega_small.copy())
                else:
                    _, e = np.frexp(block.divisors.astype(np.float64))
                    chunks.append((e - 1).astype(np.uint8))
            # values stay below 64 for every kind, so uint8 keeps the cache small
            self._values = np.concatenate(chunks)
        return self._values

    def value(self, n: int) -> int:
        big, small, d = factor_counts_naive(n)
        if self.kind == "omega":
            return big
        if self.kind == "little_omega":
            return small
        return d.bit_length() - 1

    def chunk_values(self, lo: int, hi: int) -> np.ndarray:
        if hi - 1 > self.n_cap:
            raise IndexError(f"range outside sieve cap {self.n_cap}")
        return self._materialize()[lo - 1 : hi - 1].astype(np.int64)

    def count_in_range(self, n: int, lo: int, hi: int) -> int:
        if n > self.n_cap:
            raise IndexError(f"N={n} outside sieve cap {self.n_cap}")
        if hi < lo:
            return 0
        if n not in self._prefix_cache:
            vals = self._materialize()[:n]
            counts = np.bincount(vals)
            self._prefix_cache[n] = np.concatenate([[0], np.cumsum(counts)])
        prefix = self._prefix_cache[n]
        top = len(prefix) - 1
        lo_c = min(max(lo, 0), top)
        hi_c = min(max(hi + 1, 0), top)
        return int(prefix[hi_c] - prefix[lo_c])


def sequence_by_name(spec: str, n_cap: int = 10**6) -> IntegerSequence:
    if spec == "floor_log2":
        return FloorLog2Seq()
    if spec == "floor_loglog":
        return FloorLogLogSeq()
    if spec.startswith("floor_log_pow:"):
        return FloorLogPowSeq(float(spec.split(":", 1)[1]))
    if spec.startswith("lacunary:"):
        return LacunarySeq(int(spec.split(":", 1)[1]))
    if spec == "identity":
        return IdentitySeq()
    if spec in ("omega", "little_omega", "log2_divisors"):
        return SieveBackedSeq(spec, n_cap=n_cap)
    if spec.startswith("file:"):
        return FileBackedSeq(spec.split(":", 1)[1])
    raise ValueError(f"unknown sequence {spec!r}")


# ---------------------------------------------------------------------------
# lag-gap sweep-out criterion
# ---------------------------------------------------------------------------


def _seq_window(seq: IntegerSequence, lo: int, hi: int) -> list[int]:
    """a_n for n in [lo, hi], checking non-decreasing along the way."""
    vals = [seq.value(n) for n in range(lo, hi + 1)]
    for i in range(1, len(vals)):
        if vals[i] < vals[i - 1]:
            raise ValueError(
                f"sequence decreases at n={lo + i}: {vals[i - 1]} -> {vals[i]}"
            )
    return vals


def jw_phi(seq: IntegerSequence, eps: float, p: int, q: int) -> int:
    """max over p <= n <= q of a_n - a_floor(eps n); the lag gap statistic."""
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if not 1 <= p <= q:
        raise ValueError("need 1 <= p <= q")
    base = math.floor(eps * p)
    if base < 1:
        raise ValueError("floor(eps * p) must be >= 1")
    vals = _seq_window(seq, base, q)
    return max(vals[n - base] - vals[math.floor(eps * n) - base] for n in range(p, q + 1))


@dataclass
class JwWitness:
    p: int
    q: int
    ratio: float
    phi: int


@dataclass
class JwFailure:
    budget: int
    best_ratio: float

    def __bool__(self) -> bool:
        return False


def jw_search(seq: IntegerSequence, eps: float, u: int, c: float, budget: int):
    """Search for p, q with u <= p, u < q and (a_q - a_p) / phi_eps(p, q) > c.

    Scans q upward to the budget with p fixed at the smallest admissible
    start; failure is returned as a value, not raised.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    p = max(u, math.ceil(1.0 / eps))
    if p >= budget:
        return JwFailure(budget=budget, best_ratio=0.0)
    base = math.floor(eps * p)
    vals = _seq_window(seq, base, min(budget, max(p * 2, p + 16)))

    def ensure(upto: int):
        nonlocal vals
        have = base + len(vals) - 1
        if upto > have:
            vals = vals + _seq_window(seq, have + 1, upto)

    c_frac = Fraction(c)
    phi = 0
    best = 0.0
    a_p = seq.value(p)
    for q in range(p + 1, budget + 1):
        ensure(q)
        gap = vals[q - base] - vals[math.floor(eps * q) - base]
        phi = max(phi, gap)
        if phi > 0:
            num = vals[q - base] - a_p
            ratio = Fraction(num, phi)
            best = max(best, float(ratio))
            if ratio > c_frac:
                return JwWitness(p=p, q=q, ratio=float(ratio), phi=phi)
    return JwFailure(budget=budget, best_ratio=best)


# ---------------------------------------------------------------------------
# interval-condition certificates
# ---------------------------------------------------------------------------


@dataclass
class PeriodicWitness:
    window: int  # M: largest interval cardinality
    e_set: tuple[int, int]  # target set [-M, M]
    half_period: int  # L: witness system is the shift on [-L, L]
    exceedance_count: int  # X: residues with windowed hit fraction > 1 - eps
    d_constant: float  # D = C/2
    bound: float  # D * |E|
    verdict: bool
    failed_k: int | None = None


@dataclass
class SweepOutCertificate:
    seq_name: str
    eps: float
    c: float
    ratio: int  # checkpoint grid ratio R
    n_base: int  # N_0
    n_checkpoints: list  # N_1..N_r
    intervals: list  # inclusive integer intervals [lo, hi]
    hit_fractions: list
    cover_ratio: float
    p_used: int
    witness: PeriodicWitness | None = None
    seq: IntegerSequence | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "seq": self.seq_name,
            "eps": self.eps,
            "C": self.c,
            "ratio": self.ratio,
            "n_base": self.n_base,
            "n_checkpoints": list(self.n_checkpoints),
            "intervals": [list(iv) for iv in self.intervals],
            "hit_fractions": list(self.hit_fractions),
            "cover_ratio": self.cover_ratio,
            "p_used": self.p_used,
        }
        if self.witness is not None:
            w = self.witness
            out["witness"] = {
                "window": w.window,
                "e_set": list(w.e_set),
                "half_period": w.half_period,
                "exceedance_count": w.exceedance_count,
                "d_constant": w.d_constant,
                "bound": w.bound,
                "verdict": w.verdict,
                "failed_k": w.failed_k,
            }
        return out


def _union_cardinality(intervals) -> int:
    total = 0
    cur_lo = cur_hi = None
    for lo, hi in sorted(intervals):
        if cur_lo is None:
            cur_lo, cur_hi = lo, hi
        elif lo <= cur_hi + 1:
            cur_hi = max(cur_hi, hi)
        else:
            total += cur_hi - cur_lo + 1
            cur_lo, cur_hi = lo, hi
    if cur_lo is not None:
        total += cur_hi - cur_lo + 1
    return total


def default_grid_ratio(eps: float) -> int:
    """Smallest power of two strictly above 1/eps."""
    r = 2
    while r * eps <= 1.0:
        r *= 2
    return r


def interval_condition_build(
    b: IntegerSequence,
    p_profile=None,
    n0: int = 1,
    c: float = 5.0,
    eps: float = 0.1,
    ratio: int | None = None,
    a: IntegerSequence | None = None,
    budget_log2: int = 4096,
) -> SweepOutCertificate:
    """Build checkpoints and intervals satisfying the sweep-out conditions.

    The base K0 of the grid N_i = ratio**(K0 + i) is raised until the growth
    gate b_N/(b_N - b_{N/ratio}) >= 4C and the perturbation gate b/p >= 8C
    hold along the grid; r is then the first index putting half the final
    height below the span, and the certificate is checked directly.  Failure
    names the first gate that could not be met within the budget.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if c <= 0:
        raise ValueError("C must be positive")
    if not b.monotone:
        raise ValueError("base sequence must be non-decreasing")
    R = ratio if ratio is not None else default_grid_ratio(eps)
    if R * eps <= 1.0:
        raise ValueError("grid ratio must exceed 1/eps")
    seq_a = a if a is not None else b
    p_fn = p_profile if p_profile is not None else (lambda n: 0)
    c4 = 4 * Fraction(c)
    c8 = 8 * Fraction(c)
    eps_frac = Fraction(eps)
    log2_r = math.log2(R)

    k0 = max(1, math.ceil(math.log(max(n0, 2)) / math.log(R)) - 1)
    last_gate = ("growth_ratio", "no grid base examined")

    while (k0 + 2) * log2_r <= budget_log2:
        ns: dict[int, int] = {}
        bs: dict[int, int] = {}

        def grid(i: int) -> int:
            if i not in ns:
                ns[i] = R ** (k0 + i)
                bs[i] = b.value(ns[i])
            return ns[i]

        violated = None
        r = None
        i = 1
        while (k0 + i + 1) * log2_r <= budget_log2:
            try:
                grid(0)
                grid(i)
            except OverflowError as exc:
                raise SweepOutBuildError(
                    "growth_ratio",
                    f"sequence grows beyond the certifiable range: {exc}",
                ) from exc
            delta = bs[i] - bs[i - 1]
            if delta > 0 and bs[i] * c4.denominator < c4.numerator * delta:
                violated = ("growth_ratio",
                            f"b_N/(b_N - b_prev) < 4C at grid index {k0 + i}")
                break
            p_i = p_fn(ns[i])
            if p_i > 0 and bs[i] * c8.denominator < c8.numerator * p_i:
                violated = ("perturbation_bound",
                            f"b_N/p_N < 8C at grid index {k0 + i}")
                break
            if 2 * (bs[i] - bs[1]) >= bs[i]:
                r = i
                break
            i += 1
        if violated is not None:
            last_gate = violated
            k0 += i
            continue
        if r is None:
            last_gate = ("span", f"(b_Nr - b_N1)/b_Nr < 1/2 within budget at K0={k0}")
            break

        p_r = p_fn(ns[r])
        intervals = [(bs[i - 1] - p_r, bs[i] + p_r) for i in range(1, r + 1)]
        cards = [hi - lo + 1 for lo, hi in intervals]
        union = _union_cardinality(intervals)
        rho = Fraction(union, max(cards))
        if rho <= Fraction(c):
            last_gate = ("cover_ratio",
                         f"|union J|/max|J| = {union}/{max(cards)} <= C at K0={k0}")
            k0 += 1
            continue

        hits = [seq_a.count_in_range(grid(i), intervals[i - 1][0], intervals[i - 1][1])
                for i in range(1, r + 1)]
        fractions = [Fraction(h, grid(i + 1)) for i, h in enumerate(hits)]
        bad = [i for i, f in enumerate(fractions) if f < 1 - eps_frac]
        if bad:
            i0 = bad[0]
            raise SweepOutBuildError(
                "hit_fraction",
                f"hit fraction {float(fractions[i0]):.6f} < 1-eps at N={grid(i0 + 1)}",
            )
        return SweepOutCertificate(
            seq_name=seq_a.name,
            eps=eps,
            c=c,
            ratio=R,
            n_base=ns[0],
            n_checkpoints=[grid(i) for i in range(1, r + 1)],
            intervals=intervals,
            hit_fractions=[float(f) for f in fractions],
            cover_ratio=float(rho),
            p_used=p_r,
            seq=seq_a,
        )
    raise SweepOutBuildError(last_gate[0], last_gate[1] + " (budget exhausted)")


def periodic_witness(cert: SweepOutCertificate) -> SweepOutCertificate:
    """Complete a certificate with the periodic-shift exceedance count.

    Window M is the largest interval cardinality, the target set is [-M, M],
    and the system is the shift on [-L, L] with L covering all +-J_i.  The
    exceedance count X is computed exactly and compared against D |E| with
    D = C/2.
    """
    if cert.seq is None:
        raise ValueError("certificate lacks its sequence")
    if not cert.intervals:
        raise ValueError("certificate has no intervals")
    m = max(hi - lo + 1 for lo, hi in cert.intervals)
    l_half = max(max(abs(lo), abs(hi)) for lo, hi in cert.intervals)
    eps_frac = Fraction(cert.eps)
    seq = cert.seq

    def hit_fraction_ok(k: int) -> bool:
        for i, n_i in enumerate(cert.n_checkpoints):
            hits = seq.count_in_range(n_i, -m - k, m - k)
            if Fraction(hits, n_i) > 1 - eps_frac:
                return True
        return False

    x_count = 0
    for k in range(-l_half, l_half + 1):
        if hit_fraction_ok(k):
            x_count += 1

    failed_k = None
    for lo, hi in cert.intervals:
        for j in range(lo, hi + 1):
            if not hit_fraction_ok(-j):
                failed_k = -j
                break
        if failed_k is not None:
            break

    d_const = cert.c / 2.0
    e_card = 2 * m + 1
    bound = d_const * e_card
    verdict = (
        failed_k is None
        and x_count > bound
        and cert.cover_ratio > cert.c
        and all(h >= 1 - cert.eps for h in cert.hit_fractions)
    )
    cert.witness = PeriodicWitness(
        window=m,
        e_set=(-m, m),
        half_period=l_half,
        exceedance_count=x_count,
        d_constant=d_const,
        bound=bound,
        verdict=verdict,
        failed_k=failed_k,
    )
    return cert


def verify_certificate(cert: SweepOutCertificate, brute_force: bool = False) -> dict:
    """Recount every certificate quantity from its stored fields.

    With brute_force=True the hit counts are recomputed by direct enumeration
    over n <= N_i (only sensible for small checkpoints).
    """
    if cert.seq is None:
        raise ValueError("certificate lacks its sequence")
    seq = cert.seq
    checks = {}
    eps_frac = Fraction(cert.eps)

    fractions = []
    for (lo, hi), n_i in zip(cert.intervals, cert.n_checkpoints):
        if brute_force:
            hits = sum(1 for n in range(1, n_i + 1) if lo <= seq.value(n) <= hi)
        else:
            hits = seq.count_in_range(n_i, lo, hi)
        fractions.append(Fraction(hits, n_i))
    checks["hit_fractions"] = all(f >= 1 - eps_frac for f in fractions)
    checks["hit_fraction_values"] = [float(f) for f in fractions]

    cards = [hi - lo + 1 for lo, hi in cert.intervals]
    rho = Fraction(_union_cardinality(cert.intervals), max(cards))
    checks["cover_ratio"] = rho > Fraction(cert.c)
    checks["cover_ratio_value"] = float(rho)

    if cert.witness is not None:
        w = cert.witness
        m = max(cards)
        checks["window_matches"] = m == w.window
        x = 0
        for k in range(-w.half_period, w.half_period + 1):
            best = max(
                Fraction(seq.count_in_range(n_i, -m - k, m - k), n_i)
                for n_i in cert.n_checkpoints
            )
            if best > 1 - eps_frac:
                x += 1
        checks["exceedance_count_matches"] = x == w.exceedance_count
        checks["exceedance_bound"] = x > w.d_constant * (2 * m + 1)
    checks["ok"] = all(v for kk, v in checks.items()
                       if isinstance(v, bool))
    return checks


# ---------------------------------------------------------------------------
# perturbation profiles and CLTs
# ---------------------------------------------------------------------------


@dataclass
class PerturbationProfile:
    checkpoints: list[int]
    p_values: list[int]  # running max |a_n - b_n| over the kept set
    ratios: list[float]  # p_N / b_N
    excluded_density: list[float]


def hr_window_filter(c: float = 3.0):
    """Keep n >= 16 with |a_n - lnln n| <= c sqrt(lnln n); drop the rest."""

    def fn(ns: np.ndarray, a_vals: np.ndarray, b_vals: np.ndarray) -> np.ndarray:
        keep = np.zeros(len(ns), dtype=bool)
        big = ns >= 16
        ll = np.log(np.log(ns[big]))
        keep[big] = np.abs(a_vals[big] - ll) <= c * np.sqrt(ll)
        return keep

    return fn


def perturbation_profile(
    a: IntegerSequence,
    b: IntegerSequence,
    exceptional_filter=None,
    checkpoints=(),
    chunk: int = 1 << 20,
) -> PerturbationProfile:
    """Running max of |a_n - b_n| over filtered n, recorded at checkpoints."""
    cps = sorted(int(c) for c in checkpoints)
    if not cps:
        raise ValueError("need at least one checkpoint")
    p_run = 0
    excluded = 0
    out_p, out_ratio, out_density = [], [], []
    cp_iter = iter(cps)
    next_cp = next(cp_iter)
    for lo in range(1, cps[-1] + 1, chunk):
        hi = min(lo + chunk, cps[-1] + 1)
        ns = np.arange(lo, hi, dtype=np.float64)
        a_vals = a.chunk_values(lo, hi)
        b_vals = b.chunk_values(lo, hi)
        diff = np.abs(a_vals - b_vals)
        keep = (exceptional_filter(ns, a_vals, b_vals)
                if exceptional_filter is not None else np.ones(len(ns), dtype=bool))
        pos = lo
        while next_cp is not None and next_cp < hi:
            cut = next_cp - lo + 1
            seg = slice(pos - lo, cut)
            kept = keep[seg]
            if kept.any():
                p_run = max(p_run, int(diff[seg][kept].max()))
            excluded += int((~kept).sum())
            out_p.append(p_run)
            b_cp = b.value(next_cp)
            out_ratio.append(p_run / b_cp if b_cp else math.inf)
            out_density.append(excluded / next_cp)
            pos = next_cp + 1
            next_cp = next(cp_iter, None)
        seg = slice(pos - lo, hi - lo)
        kept = keep[seg]
        if kept.any():
            p_run = max(p_run, int(diff[seg][kept].max()))
        excluded += int((~kept).sum())
    return PerturbationProfile(
        checkpoints=cps, p_values=out_p, ratios=out_ratio, excluded_density=out_density
    )


@dataclass
class CltResult:
    n: int
    z_values: np.ndarray
    counts: np.ndarray
    distance: float


def clt_standardize(kind: str, source, n: int) -> CltResult:
    """Standardized histogram and normal-CDF sup distance for a count sequence.

    kind "omega" uses the weight table's pi; "little_omega" the aux omega
    histogram (both standardized by mean/variance lnln N); "log2_divisors"
    standardizes ln d with mean ln2 lnln N and sd ln2 sqrt(lnln N).
    """
    if n < 16:
        raise ValueError("N must be >= 16")
    ll = loglog(n)
    if kind == "omega":
        table: WeightTable = source
        counts = table.pi.astype(np.float64)
        z = (np.arange(len(counts)) - ll) / math.sqrt(ll)
    elif kind == "little_omega":
        aux: AuxTable = source
        counts = aux.omega_counts.astype(np.float64)
        z = (np.arange(len(counts)) - ll) / math.sqrt(ll)
    elif kind == "log2_divisors":
        aux = source
        counts = aux.divisor_counts.astype(np.float64)
        ds = np.arange(len(counts), dtype=np.float64)
        ds[0] = 1.0  # d = 0 never occurs; keep log finite
        z = (np.log(ds) - math.log(2.0) * ll) / (math.log(2.0) * math.sqrt(ll))
    else:
        raise ValueError(f"unknown CLT kind {kind!r}")
    total = int(counts.sum())
    distance = standardized_sup_distance(z, counts, total)
    return CltResult(n=n, z_values=z, counts=counts, distance=distance)
