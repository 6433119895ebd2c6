# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the block sieve and the exact accumulators.

The accumulators keep xi/eta class sums as 128-bit fixed point
(value * 2**SCALE_BITS), making results independent of block boundaries,
worker counts, and merge order.
"""

from libc.math cimport log, ldexp
from libc.stdlib cimport malloc, free

import numpy as np

cdef extern from *:
    ctypedef long long int128 "__int128_t"
    ctypedef unsigned long long uint128 "unsigned __int128"

BACKEND_NAME = "cython"
SCALE_BITS = 100

cdef double _SCALE = ldexp(1.0, 100)
cdef unsigned long long _LOW64 = 0xFFFFFFFFFFFFFFFFULL


cdef void _fill(long long lo, long long hi, const long long* primes,
                Py_ssize_t nprimes, unsigned char* ob, unsigned char* os,
                long long* dv, long long* res) noexcept nogil:
    cdef Py_ssize_t count = hi - lo
    cdef Py_ssize_t i, j, idx
    cdef long long p, start, n, q
    cdef int e
    for i in range(count):
        res[i] = lo + i
        ob[i] = 0
        os[i] = 0
        dv[i] = 1
    for j in range(nprimes):
        p = primes[j]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        if p == 2:
            # trailing-zero strip avoids the division loop for the densest prime
            idx = start - lo
            while idx < count:
                q = res[idx]
                e = 0
                while (q & 1) == 0:
                    q >>= 1
                    e += 1
                res[idx] = q
                ob[idx] += e
                os[idx] += 1
                dv[idx] *= e + 1
                idx += 2
        else:
            idx = start - lo
            while idx < count:
                q = res[idx]
                e = 0
                while q % p == 0:
                    q //= p
                    e += 1
                res[idx] = q
                ob[idx] += e
                os[idx] += 1
                dv[idx] *= e + 1
                idx += p
    for i in range(count):
        if res[i] > 1:
            ob[i] += 1
            os[i] += 1
            dv[i] *= 2


def sieve_block_fill(long long lo, long long hi, long long[::1] primes,
                     unsigned char[::1] omega_big, unsigned char[::1] omega_small,
                     long long[::1] divisors):
    """Fill factor-count arrays for n in [lo, hi); see the fallback docstring."""
    cdef Py_ssize_t count = hi - lo
    cdef long long* res = <long long*> malloc(count * sizeof(long long))
    if res == NULL:
        raise MemoryError()
    cdef const long long* pp = NULL
    cdef Py_ssize_t nprimes = primes.shape[0]
    if nprimes > 0:
        pp = &primes[0]
    try:
        with nogil:
            _fill(lo, hi, pp, nprimes, &omega_big[0], &omega_small[0],
                  &divisors[0], res)
    finally:
        free(res)


cdef object _int128_to_py(int128 v):
    # accumulators are non-negative by construction
    cdef unsigned long long hi = <unsigned long long> ((<uint128> v) >> 64)
    cdef unsigned long long lo = <unsigned long long> ((<uint128> v) & _LOW64)
    return (int(hi) << 64) | int(lo)


cdef int128 _py_to_int128(object v):
    cdef unsigned long long hi = (v >> 64) & 0xFFFFFFFFFFFFFFFF
    cdef unsigned long long lo = v & 0xFFFFFFFFFFFFFFFF
    return <int128> (((<uint128> hi) << 64) | (<uint128> lo))


cdef class StatsCore:
    """Exact accumulator for pi[k], xi[k] = sum 1/n, eta[k] = sum 1/(n ln n)."""

    cdef int128* xi
    cdef int128* eta
    cdef long long* pi
    cdef public int kcap

    def __cinit__(self, int kcap):
        self.kcap = kcap
        self.xi = <int128*> malloc(kcap * sizeof(int128))
        self.eta = <int128*> malloc(kcap * sizeof(int128))
        self.pi = <long long*> malloc(kcap * sizeof(long long))
        if self.xi == NULL or self.eta == NULL or self.pi == NULL:
            raise MemoryError()
        cdef int k
        for k in range(kcap):
            self.xi[k] = 0
            self.eta[k] = 0
            self.pi[k] = 0

    def __dealloc__(self):
        free(self.xi)
        free(self.eta)
        free(self.pi)

    def feed(self, long long lo, long long start, long long stop,
             unsigned char[::1] omega_big):
        if start >= stop:
            return
        cdef long long n
        cdef int k
        cdef double x, t
        with nogil:
            for n in range(start, stop):
                k = omega_big[n - lo]
                self.pi[k] += 1
                x = 1.0 / <double> n
                self.xi[k] += <int128> (x * _SCALE)
                if n >= 2:
                    t = 1.0 / (<double> n * log(<double> n))
                    self.eta[k] += <int128> (t * _SCALE)

    def snapshot(self):
        pi = np.zeros(self.kcap, dtype=np.int64)
        cdef long long[::1] pv = pi
        cdef int k
        xi = []
        eta = []
        for k in range(self.kcap):
            pv[k] = self.pi[k]
            xi.append(_int128_to_py(self.xi[k]))
            eta.append(_int128_to_py(self.eta[k]))
        return pi, xi, eta

    def add_snapshot(self, snap):
        pi, xi, eta = snap
        cdef long long[::1] pv = np.ascontiguousarray(pi, dtype=np.int64)
        cdef int k
        for k in range(self.kcap):
            self.pi[k] += pv[k]
            self.xi[k] += _py_to_int128(xi[k])
            self.eta[k] += _py_to_int128(eta[k])


cdef class AuxCore:
    """Histograms of the distinct-prime-factor count and the divisor count."""

    cdef public int omega_cap
    cdef public int divisor_cap
    cdef long long* om
    cdef long long* dv

    def __cinit__(self, int omega_cap, int divisor_cap):
        self.omega_cap = omega_cap
        self.divisor_cap = divisor_cap
        self.om = <long long*> malloc(omega_cap * sizeof(long long))
        self.dv = <long long*> malloc(divisor_cap * sizeof(long long))
        if self.om == NULL or self.dv == NULL:
            raise MemoryError()
        cdef int i
        for i in range(omega_cap):
            self.om[i] = 0
        for i in range(divisor_cap):
            self.dv[i] = 0

    def __dealloc__(self):
        free(self.om)
        free(self.dv)

    def feed(self, long long lo, long long start, long long stop,
             unsigned char[::1] omega_small, long long[::1] divisors):
        if start >= stop:
            return
        cdef long long n, d
        cdef int bad = 0
        with nogil:
            for n in range(start, stop):
                d = divisors[n - lo]
                if d >= self.divisor_cap:
                    bad = 1
                    break
                self.om[omega_small[n - lo]] += 1
                self.dv[d] += 1
        if bad:
            raise OverflowError("divisor count exceeds histogram capacity")

    def snapshot(self):
        om = np.zeros(self.omega_cap, dtype=np.int64)
        dv = np.zeros(self.divisor_cap, dtype=np.int64)
        cdef long long[::1] ov = om
        cdef long long[::1] dvv = dv
        cdef int i
        for i in range(self.omega_cap):
            ov[i] = self.om[i]
        for i in range(self.divisor_cap):
            dvv[i] = self.dv[i]
        return om, dv

    def add_snapshot(self, snap):
        om, dv = snap
        cdef long long[::1] ov = np.ascontiguousarray(om, dtype=np.int64)
        cdef long long[::1] dvv = np.ascontiguousarray(dv, dtype=np.int64)
        cdef int i
        for i in range(self.omega_cap):
            self.om[i] += ov[i]
        for i in range(self.divisor_cap):
            self.dv[i] += dvv[i]
