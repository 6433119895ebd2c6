"""Pure-numpy kernels: the fallback lane when the compiled core is absent.

Matches the call signatures of ``_fastcore``.  Accumulator state is kept in
exact scaled-integer form (value * 2**SCALE_BITS as a Python int), so results
do not depend on block boundaries, worker counts, or merge order.
"""

import numpy as np

BACKEND_NAME = "python"
SCALE_BITS = 100

# frexp exponents of the summed terms stay well inside [-60, 8]; 160 slots of
# headroom keep the (class, shift) bucket key collision-free.
_SHIFT_SLOTS = 160
_MANT_SPLIT = 26  # low-word bits; keeps bincount partial sums exact in float64


def sieve_block_fill(lo, hi, primes, omega_big, omega_small, divisors):
    """Fill factor-count arrays for n in [lo, hi).

    ``primes`` must contain every prime <= isqrt(hi - 1).  For each prime the
    residue of every multiple is divided out completely, counting the exponent;
    a leftover residue > 1 is a single prime factor above the sieving limit.
    """
    count = hi - lo
    res = np.arange(lo, hi, dtype=np.int64)
    omega_big[:count] = 0
    omega_small[:count] = 0
    divisors[:count] = 1
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        start = lo + (-lo) % p
        if start >= hi:
            continue
        off = start - lo
        view = res[off::p]
        e = np.ones(len(view), dtype=np.int64)
        view //= p
        alive = np.flatnonzero(view % p == 0)
        while alive.size:
            sub = view[alive] // p
            view[alive] = sub
            e[alive] += 1
            alive = alive[sub % p == 0]
        omega_big[off:count:p] += e.astype(np.uint8)
        omega_small[off:count:p] += 1
        divisors[off:count:p] *= e + 1
    leftover = res > 1
    omega_big[:count][leftover] += 1
    omega_small[:count][leftover] += 1
    divisors[:count][leftover] *= 2


def _scaled_int_sums(keys, terms, nkeys):
    """Exact per-key sums of terms * 2**SCALE_BITS, as Python ints.

    Every term is decomposed into mantissa * 2**shift and bucketed by
    (key, shift); bucket totals stay below 2**53 so float64 bincount sums are
    exact.
    """
    mant, exp = np.frexp(terms)
    mant_i = np.ldexp(mant, 53).astype(np.int64)
    shift = exp.astype(np.int64) - 53 + SCALE_BITS
    if shift.size and (shift.min() < 0 or shift.max() >= _SHIFT_SLOTS):
        raise OverflowError("term outside exact accumulation range")
    bucket = keys * _SHIFT_SLOTS + shift
    hi_sum = np.bincount(bucket, weights=(mant_i >> _MANT_SPLIT).astype(np.float64),
                         minlength=nkeys * _SHIFT_SLOTS)
    lo_sum = np.bincount(bucket, weights=(mant_i & ((1 << _MANT_SPLIT) - 1)).astype(np.float64),
                         minlength=nkeys * _SHIFT_SLOTS)
    totals = [0] * nkeys
    for k in range(nkeys):
        base = k * _SHIFT_SLOTS
        acc = 0
        for s in range(_SHIFT_SLOTS):
            h = int(hi_sum[base + s])
            l = int(lo_sum[base + s])
            if h or l:
                acc += ((h << _MANT_SPLIT) + l) << s
        totals[k] = acc
    return totals


class StatsCore:
    """Exact accumulator for the per-class counts and reciprocal sums.

    Classes are indexed by the multiplicity count Omega(n); tracked are
    pi[k] = #{n : Omega(n)=k}, xi[k] = sum 1/n, eta[k] = sum 1/(n ln n) (n>=2).
    """

    def __init__(self, kcap):
        self.kcap = kcap
        self.pi = np.zeros(kcap, dtype=np.int64)
        self.xi = [0] * kcap
        self.eta = [0] * kcap

    def feed(self, lo, start, stop, omega_big):
        """Accumulate n in [start, stop) from a block whose arrays begin at lo."""
        if start >= stop:
            return
        sl = slice(start - lo, stop - lo)
        keys = omega_big[sl].astype(np.int64)
        self.pi += np.bincount(keys, minlength=self.kcap)
        ns = np.arange(start, stop, dtype=np.float64)
        xi_terms = 1.0 / ns
        for k, v in enumerate(_scaled_int_sums(keys, xi_terms, self.kcap)):
            self.xi[k] += v
        if stop > 2:
            cut = max(start, 2)
            ns2 = ns[cut - start:]
            keys2 = keys[cut - start:]
            eta_terms = 1.0 / (ns2 * np.log(ns2))
            for k, v in enumerate(_scaled_int_sums(keys2, eta_terms, self.kcap)):
                self.eta[k] += v

    def snapshot(self):
        return self.pi.copy(), list(self.xi), list(self.eta)

    def add_snapshot(self, snap):
        pi, xi, eta = snap
        self.pi += np.asarray(pi, dtype=np.int64)
        for k in range(self.kcap):
            self.xi[k] += xi[k]
            self.eta[k] += eta[k]


class AuxCore:
    """Histograms of the distinct-prime-factor count and the divisor count."""

    def __init__(self, omega_cap, divisor_cap):
        self.omega_cap = omega_cap
        self.divisor_cap = divisor_cap
        self.omega_hist = np.zeros(omega_cap, dtype=np.int64)
        self.divisor_hist = np.zeros(divisor_cap, dtype=np.int64)

    def feed(self, lo, start, stop, omega_small, divisors):
        if start >= stop:
            return
        sl = slice(start - lo, stop - lo)
        om = omega_small[sl].astype(np.int64)
        dv = divisors[sl]
        if dv.size and int(dv.max()) >= self.divisor_cap:
            raise OverflowError("divisor count exceeds histogram capacity")
        self.omega_hist += np.bincount(om, minlength=self.omega_cap)
        self.divisor_hist += np.bincount(dv, minlength=self.divisor_cap)

    def snapshot(self):
        return self.omega_hist.copy(), self.divisor_hist.copy()

    def add_snapshot(self, snap):
        om, dv = snap
        self.omega_hist += np.asarray(om, dtype=np.int64)
        self.divisor_hist += np.asarray(dv, dtype=np.int64)
