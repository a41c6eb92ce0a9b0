"""Pure-Python solver kernel: combined-SNR evaluation and bisection solves.

Reference implementation for the compiled kernel in ``_fast.pyx``; both
expose the same three functions and agree to solver tolerance.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure-python"

REL_TOL = 1e-12
MAX_ITER = 200


def mrc_snr_value(p0, g_sd, g_sr, g_rd, p_rel, noise, mask=None):
    """Combined output SNR: the direct branch plus the selected relay branches.

    `mask` selects relays by bit (bit i covers the arrays' entry i);
    None selects every entry.
    """
    total = p0 * g_sd / noise
    for i in range(len(g_sr)):
        if mask is None or mask >> i & 1:
            num = p0 * p_rel[i] * g_sr[i] * g_rd[i]
            den = noise * (p0 * g_sr[i] + p_rel[i] * g_rd[i] + noise)
            total += num / den
    return total


def solve_p0(g_sd, g_sr, g_rd, p_rel, noise, gamma, p_d, mask=None, hi=None):
    """Smallest source power whose combined SNR meets `gamma`.

    Bisection on [0, hi]; `hi` defaults to the direct power `p_d`, which
    always meets the target. The feasible upper endpoint is returned, so the
    result never undershoots the target. With no relays selected the direct
    power is returned exactly.
    """
    if mask == 0 or len(g_sr) == 0:
        return p_d
    lo = 0.0
    if hi is None:
        hi = p_d
    for _ in range(MAX_ITER):
        if hi - lo <= REL_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mrc_snr_value(mid, g_sd, g_sr, g_rd, p_rel, noise, mask) >= gamma:
            hi = mid
        else:
            lo = mid
    return hi


def p0_table(g_sd, g_sr, g_rd, p_rel, noise, gamma, p_d):
    """Source power for every relay subset, as a bitmask-indexed array.

    Masks are processed in natural order, so every one-relay-smaller subset
    is already solved and provides the tightest available starting bracket;
    this also makes the table monotone under set inclusion by construction.
    """
    n = len(g_sr)
    out = np.empty(1 << n, dtype=np.float64)
    out[0] = p_d
    for mask in range(1, 1 << n):
        hi = p_d
        m = mask
        while m:
            low_bit = m & -m
            sub = out[mask ^ low_bit]
            if sub < hi:
                hi = sub
            m ^= low_bit
        out[mask] = solve_p0(g_sd, g_sr, g_rd, p_rel, noise, gamma, p_d, mask, hi=float(hi))
    return out
