# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver kernel: combined-SNR evaluation and bisection solves.

Mirrors ``coalnet._kernels._pure``; both backends agree to solver tolerance.
"""

import numpy as np

BACKEND = "compiled"

cdef double REL_TOL = 1e-12
cdef int MAX_ITER = 200


cdef double _snr(double p0, double g_sd, double[::1] g_sr, double[::1] g_rd,
                 double[::1] p_rel, double noise, unsigned long mask,
                 bint all_relays) noexcept nogil:
    cdef double total = p0 * g_sd / noise
    cdef double num, den
    cdef Py_ssize_t i
    cdef Py_ssize_t n = g_sr.shape[0]
    for i in range(n):
        if all_relays or (mask >> i) & 1:
            num = p0 * p_rel[i] * g_sr[i] * g_rd[i]
            den = noise * (p0 * g_sr[i] + p_rel[i] * g_rd[i] + noise)
            total += num / den
    return total


cdef double _solve(double g_sd, double[::1] g_sr, double[::1] g_rd, double[::1] p_rel,
                   double noise, double gamma, double p_d, unsigned long mask,
                   bint all_relays, double hi) noexcept nogil:
    cdef double lo = 0.0
    cdef double mid
    cdef int it
    if g_sr.shape[0] == 0 or (not all_relays and mask == 0):
        return p_d
    for it in range(MAX_ITER):
        if hi - lo <= REL_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _snr(mid, g_sd, g_sr, g_rd, p_rel, noise, mask, all_relays) >= gamma:
            hi = mid
        else:
            lo = mid
    return hi


def mrc_snr_value(double p0, double g_sd, g_sr, g_rd, p_rel, double noise, mask=None):
    """Combined output SNR: the direct branch plus the selected relay branches."""
    cdef double[::1] sr = np.ascontiguousarray(g_sr, dtype=np.float64)
    cdef double[::1] rd = np.ascontiguousarray(g_rd, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(p_rel, dtype=np.float64)
    if mask is None:
        return _snr(p0, g_sd, sr, rd, pr, noise, 0, True)
    return _snr(p0, g_sd, sr, rd, pr, noise, <unsigned long> mask, False)


def solve_p0(double g_sd, g_sr, g_rd, p_rel, double noise, double gamma,
             double p_d, mask=None, hi=None):
    """Smallest source power whose combined SNR meets `gamma` (bisection)."""
    cdef double[::1] sr = np.ascontiguousarray(g_sr, dtype=np.float64)
    cdef double[::1] rd = np.ascontiguousarray(g_rd, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(p_rel, dtype=np.float64)
    cdef double h = p_d if hi is None else <double> hi
    if mask is None:
        return _solve(g_sd, sr, rd, pr, noise, gamma, p_d, 0, True, h)
    return _solve(g_sd, sr, rd, pr, noise, gamma, p_d, <unsigned long> mask, False, h)


def p0_table(double g_sd, g_sr, g_rd, p_rel, double noise, double gamma, double p_d):
    """Source power for every relay subset, as a bitmask-indexed array.

    Masks are processed in natural order, so every one-relay-smaller subset
    is already solved and provides the tightest available starting bracket;
    this also makes the table monotone under set inclusion by construction.
    """
    cdef double[::1] sr = np.ascontiguousarray(g_sr, dtype=np.float64)
    cdef double[::1] rd = np.ascontiguousarray(g_rd, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(p_rel, dtype=np.float64)
    cdef Py_ssize_t n = sr.shape[0]
    out_arr = np.empty(1 << n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef unsigned long mask, m, low_bit
    cdef unsigned long total = 1UL << n
    cdef double hi, sub
    out[0] = p_d
    with nogil:
        for mask in range(1, total):
            hi = p_d
            m = mask
            while m:
                low_bit = m & (~m + 1)
                sub = out[mask ^ low_bit]
                if sub < hi:
                    hi = sub
                m ^= low_bit
            out[mask] = _solve(g_sd, sr, rd, pr, noise, gamma, p_d, mask, False, hi)
    return out_arr
