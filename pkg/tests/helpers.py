"""Shared builders for randomized solver tests."""

import math

import numpy as np

from coalnet.channel import ChannelModel, Position
from coalnet.cooptx import CoalitionContext


def random_context(
    rng: np.random.Generator,
    n_relays: int,
    model: ChannelModel | None = None,
    dest_range=(30.0, 95.0),
    relay_range=(5.0, 300.0),
) -> CoalitionContext:
    """Random feasible single-flow geometry with the given relay count.

    The destination stays inside the direct-feasibility radius and relays
    are scattered around the source, so every subset solve is well posed.
    """
    if model is None:
        model = ChannelModel()
    dest_d = rng.uniform(*dest_range)
    dest_a = rng.uniform(0.0, 2.0 * math.pi)
    dest = Position(float(dest_d * math.cos(dest_a)), float(dest_d * math.sin(dest_a)))
    relays = []
    for _ in range(n_relays):
        r = rng.uniform(*relay_range)
        a = rng.uniform(0.0, 2.0 * math.pi)
        relays.append(Position(float(r * math.cos(a)), float(r * math.sin(a))))
    return CoalitionContext.from_positions(Position(0.0, 0.0), dest, relays, model)


def combined_snr_curve(p0: np.ndarray, ctx: CoalitionContext, subset=None) -> np.ndarray:
    """Independent vectorized SNR evaluation used as a test oracle.

    Recomputes the branch sum directly from the context's link data without
    touching the kernel code paths.
    """
    noise = ctx.model.noise_mw
    total = p0 * ctx.g_sd / noise
    indices = range(1, ctx.n_relays + 1) if subset is None else subset
    for i in indices:
        r = ctx.relays[i - 1]
        num = p0 * r.p_relay_mw * r.g_sr * r.g_rd
        den = noise * (p0 * r.g_sr + r.p_relay_mw * r.g_rd + noise)
        total = total + num / den
    return total


def grid_search_p0(ctx: CoalitionContext, subset=None, step_rel: float = 1e-6) -> float:
    """Brute-force root: the first grid point whose combined SNR meets the target."""
    p = np.arange(0.0, ctx.p_d_mw * (1.0 + step_rel), step_rel * ctx.p_d_mw)
    snr = combined_snr_curve(p, ctx, subset)
    hits = np.flatnonzero(snr >= ctx.model.snr_target)
    assert hits.size, "target unreachable on the grid"
    return float(p[hits[0]])
