"""Weight functions of the k-almost primes and their asymptotic diagnostics.

At a checkpoint N the table holds, for k = 0..floor(log2 N),

    pi[k]  = #{n <= N : Omega(n) = k}          (pi[0] = 1, from n = 1)
    xi[k]  = sum of 1/n over that class
    eta[k] = sum of 1/(n ln n) over the class, n >= 2

plus the histogram of the standardized values (Omega(n) - lnln N)/sqrt(lnln N).
Accumulation is exact (scaled 128-bit integers), so partial tables over
disjoint ranges merge associatively and checkpoint files are bit-reproducible.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import backend
from .sieve import FactorCountBlock, SieveConfig

EK_BIN_WIDTH = 0.1
EK_RANGE = 6.0
DIVISOR_HIST_CAP = 1 << 13  # max divisor count below 10**12 is 6720

# double-log quantities need lnln N >= 1, i.e. N >= 16
MIN_DOUBLE_LOG_N = 16


def loglog(n: float) -> float:
    return math.log(math.log(n))


def require_double_log_domain(n: int) -> None:
    if n < MIN_DOUBLE_LOG_N:
        raise ValueError(f"N must be >= {MIN_DOUBLE_LOG_N} for double-log quantities")


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erf (relative error well below 1e-7)."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


@dataclass
class EkHistogram:
    n: int
    edges: np.ndarray  # 121 edges spanning [-6, 6]
    counts: np.ndarray  # int64, 120 bins
    underflow: int
    overflow: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def _standardized_positions(k_values: np.ndarray, n: int) -> np.ndarray:
    ll = loglog(n)
    return (k_values - ll) / math.sqrt(ll)


def build_ek_histogram(pi: np.ndarray, n: int) -> EkHistogram:
    edges = (np.arange(121) - 60) / 10.0
    counts = np.zeros(120, dtype=np.int64)
    under = over = 0
    z = _standardized_positions(np.arange(len(pi), dtype=np.float64), n)
    for k, zk in enumerate(z):
        c = int(pi[k])
        if c == 0:
            continue
        if zk < -EK_RANGE:
            under += c
        elif zk >= EK_RANGE:
            over += c
        else:
            counts[int((zk + EK_RANGE) / EK_BIN_WIDTH)] += c
    return EkHistogram(n=n, edges=edges, counts=counts, underflow=under, overflow=over)


@dataclass
class WeightTable:
    n: int
    pi: np.ndarray  # int64, length k_max + 1
    xi: np.ndarray  # float64
    eta: np.ndarray  # float64
    ek_hist: EkHistogram

    @property
    def k_max(self) -> int:
        return len(self.pi) - 1


def k_max_for(n: int) -> int:
    return n.bit_length() - 1


def make_table(n: int, pi: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> WeightTable:
    kk = k_max_for(n) + 1
    return WeightTable(
        n=n,
        pi=np.asarray(pi[:kk], dtype=np.int64).copy(),
        xi=np.asarray(xi[:kk], dtype=np.float64).copy(),
        eta=np.asarray(eta[:kk], dtype=np.float64).copy(),
        ek_hist=build_ek_histogram(pi[:kk], n),
    )


class WeightAccumulator:
    """Block consumer building WeightTables at the configured checkpoints.

    Feed order is ascending n without gaps; out-of-order blocks abort.  A
    ``start_n`` other than 1 makes a partial-range accumulator for merging.
    """

    def __init__(self, n_max: int, checkpoints=(), start_n: int = 1, on_table=None):
        self.n_max = n_max
        self.kcap = n_max.bit_length()
        self._core = backend.StatsCore(self.kcap)
        self._pending = sorted(int(c) for c in checkpoints)
        for c in self._pending:
            if not 3 <= c <= n_max:
                raise ValueError("checkpoints must lie in [3, n_max]")
        self.start_n = start_n
        self.next_n = start_n
        self.on_table = on_table
        self.tables: list[WeightTable] = []

    def consume(self, block: FactorCountBlock) -> None:
        if block.lo != self.next_n:
            raise RuntimeError(
                f"out-of-order block: expected start {self.next_n}, got {block.lo}"
            )
        pos = block.lo
        while self._pending and self._pending[0] < block.hi:
            cp = self._pending.pop(0)
            self._core.feed(block.lo, pos, cp + 1, block.omega_big)
            pos = cp + 1
            self._emit(cp)
        self._core.feed(block.lo, pos, block.hi, block.omega_big)
        self.next_n = block.hi

    def _emit(self, n: int) -> None:
        table = self._build_table(n)
        self.tables.append(table)
        if self.on_table is not None:
            self.on_table(table)

    def _build_table(self, n: int) -> WeightTable:
        pi, xi_ints, eta_ints = self._core.snapshot()
        if self.start_n == 1 and int(pi.sum()) != n:
            raise RuntimeError(f"accumulated counts do not partition [1, {n}]")
        xi = np.array([backend.scaled_to_float(v) for v in xi_ints])
        eta = np.array([backend.scaled_to_float(v) for v in eta_ints])
        return make_table(n, pi, xi, eta)

    def table_now(self) -> WeightTable:
        """Table for everything accumulated so far (N = last processed n)."""
        return self._build_table(self.next_n - 1)

    def snapshot(self):
        return self._core.snapshot()

    @classmethod
    def merged(cls, first: "WeightAccumulator", second: "WeightAccumulator"):
        """Combine accumulators over adjacent ranges; exact, order-fixed."""
        if first.kcap != second.kcap:
            raise ValueError("mismatched class capacity")
        if first.next_n != second.start_n:
            raise ValueError("ranges are not adjacent")
        out = cls(first.n_max, checkpoints=(), start_n=first.start_n)
        out._core.add_snapshot(first.snapshot())
        out._core.add_snapshot(second.snapshot())
        out.next_n = second.next_n
        return out


@dataclass
class AuxTable:
    """Checkpoint histograms for omega(n) and the divisor count d(n)."""

    n: int
    omega_counts: np.ndarray  # int64, index = omega value
    divisor_counts: np.ndarray  # int64, index = d value


class AuxAccumulator:
    def __init__(self, n_max: int, checkpoints=(), start_n: int = 1, on_table=None):
        self.n_max = n_max
        self.kcap = n_max.bit_length()
        self._core = backend.AuxCore(self.kcap, DIVISOR_HIST_CAP)
        self._pending = sorted(int(c) for c in checkpoints)
        self.start_n = start_n
        self.next_n = start_n
        self.on_table = on_table
        self.tables: list[AuxTable] = []

    def consume(self, block: FactorCountBlock) -> None:
        if block.lo != self.next_n:
            raise RuntimeError(
                f"out-of-order block: expected start {self.next_n}, got {block.lo}"
            )
        pos = block.lo
        while self._pending and self._pending[0] < block.hi:
            cp = self._pending.pop(0)
            self._core.feed(block.lo, pos, cp + 1, block.omega_small, block.divisors)
            pos = cp + 1
            self._emit(cp)
        self._core.feed(block.lo, pos, block.hi, block.omega_small, block.divisors)
        self.next_n = block.hi

    def _emit(self, n: int) -> None:
        om, dv = self._core.snapshot()
        om = om[: int(np.max(np.nonzero(om)[0])) + 1] if om.any() else om[:1]
        dv = dv[: int(np.max(np.nonzero(dv)[0])) + 1] if dv.any() else dv[:1]
        table = AuxTable(n=n, omega_counts=om.copy(), divisor_counts=dv.copy())
        self.tables.append(table)
        if self.on_table is not None:
            self.on_table(table)

    def snapshot(self):
        return self._core.snapshot()


# ---------------------------------------------------------------------------
# asymptotic diagnostics
# ---------------------------------------------------------------------------


def landau_ratio(table: WeightTable, k: int) -> float:
    """pi[k] measured against N (lnln N)^(k-1) / ((k-1)! ln N)."""
    if k == 0:
        raise ValueError("undefined for k=0")
    require_double_log_domain(table.n)
    if k > table.k_max or table.pi[k] == 0:
        return 0.0
    n = table.n
    pred = n * loglog(n) ** (k - 1) / (math.factorial(k - 1) * math.log(n))
    return float(table.pi[k]) / pred


def erdos_log_ratio(table: WeightTable, k: int) -> float:
    """xi[k] measured against (lnln N)^k / k!."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if table.n < 3:
        raise ValueError("N must be >= 3")
    if k > table.k_max or table.xi[k] == 0.0:
        return 0.0
    pred = loglog(table.n) ** k / math.factorial(k)
    return float(table.xi[k]) / pred


def gaussian_weight(n: int, k: float) -> float:
    """Gaussian surrogate for pi[k]/N: mean and variance lnln N."""
    require_double_log_domain(n)
    ll = loglog(n)
    return math.exp(-((k - ll) ** 2) / (2.0 * ll)) / math.sqrt(2.0 * math.pi * ll)


def hr_fraction(table: WeightTable, c: float) -> float:
    """Fraction of n <= N with |Omega(n) - lnln N| > c sqrt(lnln N)."""
    if c <= 0:
        raise ValueError("c must be positive")
    require_double_log_domain(table.n)
    ll = loglog(table.n)
    half_width = c * math.sqrt(ll)
    ks = np.arange(table.k_max + 1, dtype=np.float64)
    outside = np.abs(ks - ll) > half_width
    return float(table.pi[outside].sum()) / table.n


def standardized_sup_distance(z_values: np.ndarray, counts: np.ndarray, total: int) -> float:
    """Sup over histogram bin edges of |empirical CDF - normal CDF|."""
    order = np.argsort(z_values)
    z_sorted = z_values[order]
    cum = np.cumsum(counts[order]) / total
    edges = (np.arange(121) - 60) / 10.0
    worst = 0.0
    for x in edges:
        emp = float(cum[np.searchsorted(z_sorted, x, side="right") - 1]) if x >= z_sorted[0] else 0.0
        worst = max(worst, abs(emp - normal_cdf(x)))
    return worst


def ek_cdf_distance(table: WeightTable) -> float:
    """Sup-distance of the standardized Omega distribution from the normal law."""
    require_double_log_domain(table.n)
    ks = np.arange(table.k_max + 1, dtype=np.float64)
    z = _standardized_positions(ks, table.n)
    return standardized_sup_distance(z, table.pi.astype(np.float64), table.n)


@dataclass
class HeadMass:
    head: float
    tail: float
    total: float


def eta_head_mass(table: WeightTable, window: str = "double", c: float = 3.0) -> HeadMass:
    """Mass of eta on k <= L_N, normalized by lnln N.

    window="hr" uses L_N = lnln N + c sqrt(lnln N); window="double" uses
    L_N = 2 lnln N.
    """
    require_double_log_domain(table.n)
    ll = loglog(table.n)
    if window == "hr":
        l_n = ll + c * math.sqrt(ll)
    elif window == "double":
        l_n = 2.0 * ll
    else:
        raise ValueError("window must be 'hr' or 'double'")
    total = math.fsum(table.eta) / ll
    head = math.fsum(table.eta[k] for k in range(min(int(l_n), table.k_max) + 1)) / ll
    return HeadMass(head=head, tail=total - head, total=total)


def xi_window_mass(table: WeightTable, c: float) -> float:
    """(1/ln N) * sum of xi[k] over |k - lnln N| <= c sqrt(lnln N)."""
    if c < 1:
        raise ValueError("c must be >= 1")
    require_double_log_domain(table.n)
    ll = loglog(table.n)
    half = c * math.sqrt(ll)
    ks = np.arange(table.k_max + 1, dtype=np.float64)
    inside = np.abs(ks - ll) <= half
    return math.fsum(table.xi[inside]) / math.log(table.n)


def glw_model(k: np.ndarray, d: float) -> np.ndarray:
    """1 - (ln 2 / 4) 2^-k d k^2: the leading saturation model for eta(k)."""
    k = np.asarray(k, dtype=np.float64)
    return 1.0 - (math.log(2.0) / 4.0) * np.exp2(-k) * d * k * k


@dataclass
class GlwFit:
    d: float
    k_range: tuple[int, int]
    n: int
    residuals: np.ndarray
    model: np.ndarray


def glw_fit(tables, k_range: tuple[int, int]) -> GlwFit:
    """Least-squares d over k_range using the largest checkpoint's eta."""
    table = max(tables, key=lambda t: t.n)
    k_lo, k_hi = k_range
    if k_lo > k_hi:
        raise ValueError("unsaturated k: empty range")
    if 2**k_hi > table.n / 1000:
        raise ValueError(f"unsaturated k: 2^{k_hi} > N/1000 at N={table.n}")
    if k_hi > table.k_max:
        raise ValueError("k_range exceeds table")
    ks = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    y = 1.0 - table.eta[k_lo : k_hi + 1]
    w = (math.log(2.0) / 4.0) * np.exp2(-ks) * ks * ks
    d = float(np.dot(w, y) / np.dot(w, w))
    model = glw_model(ks, d)
    return GlwFit(d=d, k_range=(k_lo, k_hi), n=table.n,
                  residuals=table.eta[k_lo : k_hi + 1] - model, model=model)


# ---------------------------------------------------------------------------
# independent direct passes (oracle routes; no shared accumulator machinery)
# ---------------------------------------------------------------------------


def _chunks(n: int, start: int = 1, size: int = 1 << 22):
    lo = start
    while lo <= n:
        hi = min(lo + size, n + 1)
        yield lo, hi
        lo = hi


def _checkpoint_sums(checkpoints, term_fn, start: int) -> dict[int, float]:
    """Running sums of term_fn values at each checkpoint, one blockwise pass.

    term_fn(lo, hi) returns (positions, terms) for positions in [lo, hi).
    """
    cps = sorted(set(int(c) for c in checkpoints))
    out: dict[int, float] = {}
    partials: list[float] = []
    for lo, hi in _chunks(cps[-1], start=start):
        positions, terms = term_fn(lo, hi)
        prev = 0
        for c in (c for c in cps if lo <= c < hi):
            cut = int(np.searchsorted(positions, c, side="right"))
            partials.append(float(terms[prev:cut].sum()))
            out[c] = math.fsum(partials)
            partials = [out[c]]
            prev = cut
        partials.append(float(terms[prev:].sum()))
    return out


def harmonic_direct(checkpoints) -> dict[int, float]:
    """H_N at each checkpoint, by a plain blockwise pass over 1/n."""

    def term_fn(lo, hi):
        ns = np.arange(lo, hi, dtype=np.float64)
        return ns, 1.0 / ns

    return _checkpoint_sums(checkpoints, term_fn, start=1)


def double_log_mass_direct(checkpoints) -> dict[int, float]:
    """Sum of 1/(n ln n) for 2 <= n <= N at each checkpoint."""

    def term_fn(lo, hi):
        ns = np.arange(lo, hi, dtype=np.float64)
        return ns, 1.0 / (ns * np.log(ns))

    return _checkpoint_sums(checkpoints, term_fn, start=2)


def _prime_mask_segment(lo: int, hi: int, root_primes) -> np.ndarray:
    """Boolean primality mask for [lo, hi) via plain composite marking."""
    mask = np.ones(hi - lo, dtype=bool)
    for i in range(lo, min(hi, 2)):
        mask[i - lo] = False
    for p in root_primes:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start < hi:
            mask[start - lo :: p] = False
    return mask


@dataclass
class EtaBracket:
    """eta over the primes up to N, with a PNT-style tail allowance.

    The true all-primes sum lies in [value, value + 2/ln N] once N is large;
    both ends are reported.
    """

    n: int
    value: float
    lo: float
    hi: float


def _bracket(n: int, value: float) -> EtaBracket:
    return EtaBracket(n=n, value=value, lo=value, hi=value + 2.0 / math.log(n))


def eta_of_primes(n: int, checkpoints=None):
    """Sum of 1/(p ln p) over primes p <= N, via an independent mask sieve.

    With ``checkpoints`` given, returns {checkpoint: EtaBracket} from a single
    pass; otherwise the bracket at N.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    cps = sorted(set(int(c) for c in checkpoints))[:] if checkpoints else []
    if cps and cps[-1] > n:
        raise ValueError("checkpoints must not exceed N")
    from .sieve import base_primes

    root_primes = base_primes(math.isqrt(n))

    def term_fn(lo, hi):
        mask = _prime_mask_segment(lo, hi, root_primes)
        ps = (np.flatnonzero(mask) + lo).astype(np.float64)
        return ps, 1.0 / (ps * np.log(ps))

    sums = _checkpoint_sums(set(cps) | {n}, term_fn, start=2)
    if checkpoints is None:
        return _bracket(n, sums[n])
    return {c: _bracket(c, sums[c]) for c in sums if c in set(cps)}


# ---------------------------------------------------------------------------
# checkpoint persistence
# ---------------------------------------------------------------------------


def config_hash(config: SieveConfig) -> str:
    blob = json.dumps(
        {
            "n_max": config.n_max,
            "block_size": config.block_size,
            "checkpoints": list(config.checkpoints),
        },
        sort_keys=True,
    ).encode()
    return hashlib.sha256(blob).hexdigest()[:8]


def run_dir_name(config: SieveConfig) -> str:
    return f"run_n{config.n_max}_{config_hash(config)}"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_checkpoint(dirpath: str, table: WeightTable) -> str:
    path = os.path.join(dirpath, f"checkpoint_{table.n:012d}.csv")
    lines = ["N,k,pi,xi,eta"]
    for k in range(table.k_max + 1):
        lines.append(
            f"{table.n},{k},{int(table.pi[k])},{_fmt(table.xi[k])},{_fmt(table.eta[k])}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    hpath = os.path.join(dirpath, f"hist_{table.n:012d}.csv")
    h = table.ek_hist
    hlines = ["N,bin_lo,bin_hi,count"]
    hlines.append(f"{table.n},-inf,{_fmt(h.edges[0])},{h.underflow}")
    for i in range(120):
        hlines.append(
            f"{table.n},{_fmt(h.edges[i])},{_fmt(h.edges[i + 1])},{int(h.counts[i])}"
        )
    hlines.append(f"{table.n},{_fmt(h.edges[-1])},inf,{h.overflow}")
    with open(hpath, "w", newline="") as fh:
        fh.write("\n".join(hlines) + "\n")
    return path


def read_checkpoint(path: str) -> WeightTable:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "N,k,pi,xi,eta":
            raise ValueError(f"bad checkpoint header in {path}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    n = int(rows[0][0])
    kk = len(rows)
    pi = np.zeros(kk, dtype=np.int64)
    xi = np.zeros(kk)
    eta = np.zeros(kk)
    for row in rows:
        k = int(row[1])
        pi[k] = int(row[2])
        xi[k] = float(row[3])
        eta[k] = float(row[4])
    return make_table(n, pi, xi, eta)


def write_aux(dirpath: str, aux: AuxTable) -> str:
    path = os.path.join(dirpath, f"aux_{aux.n:012d}.csv")
    lines = ["N,kind,value,count"]
    for v, c in enumerate(aux.omega_counts):
        if c:
            lines.append(f"{aux.n},little_omega,{v},{int(c)}")
    for v, c in enumerate(aux.divisor_counts):
        if c:
            lines.append(f"{aux.n},divisor_count,{v},{int(c)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_aux(path: str) -> AuxTable:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "N,kind,value,count":
            raise ValueError(f"bad aux header in {path}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    n = int(rows[0][0])
    om: dict[int, int] = {}
    dv: dict[int, int] = {}
    for row in rows:
        target = om if row[1] == "little_omega" else dv
        target[int(row[2])] = int(row[3])
    omega_counts = np.zeros(max(om) + 1 if om else 1, dtype=np.int64)
    for v, c in om.items():
        omega_counts[v] = c
    divisor_counts = np.zeros(max(dv) + 1 if dv else 1, dtype=np.int64)
    for v, c in dv.items():
        divisor_counts[v] = c
    return AuxTable(n=n, omega_counts=omega_counts, divisor_counts=divisor_counts)


def write_run_config(dirpath: str, config: SieveConfig) -> None:
    blob = json.dumps(
        {
            "n_max": config.n_max,
            "block_size": config.block_size,
            "checkpoints": list(config.checkpoints),
        },
        sort_keys=True,
    )
    with open(os.path.join(dirpath, "config.json"), "w", newline="") as fh:
        fh.write(blob + "\n")


def load_run(dirpath: str):
    """(config dict, weight tables, aux tables) from a run directory."""
    cfg_path = os.path.join(dirpath, "config.json")
    config = None
    if os.path.exists(cfg_path):
        with open(cfg_path) as fh:
            config = json.load(fh)
    names = sorted(os.listdir(dirpath))
    tables = [read_checkpoint(os.path.join(dirpath, f))
              for f in names if f.startswith("checkpoint_")]
    aux = [read_aux(os.path.join(dirpath, f)) for f in names if f.startswith("aux_")]
    if not tables:
        raise FileNotFoundError(f"no checkpoints found in {dirpath}")
    return config, tables, aux


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------


def asymptotic_report(tables, c_values=(2.0, 3.0, 4.0), glw_range=(8, 14)) -> dict:
    """Measured/predicted ratio tables and scalar diagnostics per checkpoint."""
    report = {"checkpoints": []}
    for table in sorted(tables, key=lambda t: t.n):
        entry = {"n": table.n}
        if table.n >= MIN_DOUBLE_LOG_N:
            entry["landau_ratio"] = {
                k: landau_ratio(table, k) for k in range(1, table.k_max + 1)
            }
            entry["erdos_log_ratio"] = {
                k: erdos_log_ratio(table, k) for k in range(table.k_max + 1)
            }
            entry["gaussian_ratio"] = {
                k: (table.pi[k] / table.n) / gaussian_weight(table.n, k)
                for k in range(table.k_max + 1)
            }
            entry["hr_fraction"] = {c: hr_fraction(table, c) for c in c_values}
            entry["ek_cdf_distance"] = ek_cdf_distance(table)
            hm_d = eta_head_mass(table, window="double")
            hm_h = eta_head_mass(table, window="hr")
            entry["eta_head_tail"] = {
                "double": {"head": hm_d.head, "tail": hm_d.tail, "total": hm_d.total},
                "hr": {"head": hm_h.head, "tail": hm_h.tail, "total": hm_h.total},
            }
            entry["xi_window_mass"] = {c: xi_window_mass(table, c) for c in c_values}
        report["checkpoints"].append(entry)
    largest = max(tables, key=lambda t: t.n)
    if largest.n >= MIN_DOUBLE_LOG_N:
        report["eta_prime_bracket"] = {
            "n": largest.n,
            "lo": float(largest.eta[1]),
            "hi": float(largest.eta[1]) + 2.0 / math.log(largest.n),
        }
        try:
            fit = glw_fit(tables, glw_range)
            report["glw_fit"] = {
                "d": fit.d,
                "k_range": list(fit.k_range),
                "n": fit.n,
                "residuals": [float(r) for r in fit.residuals],
            }
        except ValueError as exc:
            report["glw_fit"] = {"error": str(exc)}
    return report
