"""Amplify-and-forward cooperative transmission for a single source flow.

The destination combines the direct branch with every relay branch, so the
output SNR is the sum of the per-branch SNRs. The solver below inverts that
relation: given a relay subset, it finds the smallest source power whose
combined SNR meets the model's target. Relay indices are 1-based throughout
the public API, matching the game convention that player 0 is the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import channel
from ._kernels import mrc_snr_value, solve_p0
from .channel import ChannelModel, Position

__all__ = [
    "CoalitionContext",
    "RelayLink",
    "mrc_snr",
    "power_saving",
    "relay_mask",
    "required_source_power",
]


@dataclass(frozen=True)
class RelayLink:
    """One relay's channel pair and transmit power for the assisted flow."""

    g_sr: float
    g_rd: float
    p_relay_mw: float

    def __post_init__(self) -> None:
        if self.g_sr <= 0.0 or self.g_rd <= 0.0:
            raise ValueError("relay link gains must be positive")
        if self.p_relay_mw <= 0.0:
            raise ValueError("relay power must be positive")


@dataclass(frozen=True)
class CoalitionContext:
    """One source flow plus an ordered list of candidate relays.

    `p_d_mw` caches the direct power of the flow, so a context can only be
    built for a flow that is feasible without help. Use the factories below
    rather than the bare constructor so the cache and the relay-power cap
    are checked.
    """

    g_sd: float
    relays: tuple[RelayLink, ...]
    model: ChannelModel
    p_d_mw: float

    @classmethod
    def build(
        cls,
        g_sd: float,
        relays: Iterable[RelayLink],
        model: ChannelModel,
    ) -> "CoalitionContext":
        """Validate gains and relay powers, then cache the direct power."""
        relays = tuple(relays)
        for i, r in enumerate(relays, start=1):
            if r.p_relay_mw > model.p_max_mw:
                raise ValueError(
                    f"relay {i} power {r.p_relay_mw:.6g} mW exceeds the cap "
                    f"{model.p_max_mw:.6g} mW"
                )
        p_d = channel.direct_power(g_sd, model)
        return cls(g_sd=g_sd, relays=relays, model=model, p_d_mw=p_d)

    @classmethod
    def from_positions(
        cls,
        source: Position,
        destination: Position,
        relay_positions: Sequence[Position],
        model: ChannelModel,
        relay_power_mw: float | None = None,
    ) -> "CoalitionContext":
        """Build gains from geometry; relays default to the power cap."""
        p_rel = model.p_max_mw if relay_power_mw is None else relay_power_mw
        relays = [
            RelayLink(
                g_sr=channel.path_gain(source, pos, model),
                g_rd=channel.path_gain(pos, destination, model),
                p_relay_mw=p_rel,
            )
            for pos in relay_positions
        ]
        return cls.build(channel.path_gain(source, destination, model), relays, model)

    @property
    def n_relays(self) -> int:
        return len(self.relays)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.relays)) - 1

    @cached_property
    def relay_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(g_sr, g_rd, p_relay) as float64 arrays, in relay order."""
        g_sr = np.array([r.g_sr for r in self.relays], dtype=np.float64)
        g_rd = np.array([r.g_rd for r in self.relays], dtype=np.float64)
        p_rel = np.array([r.p_relay_mw for r in self.relays], dtype=np.float64)
        return g_sr, g_rd, p_rel

    def with_relay_powers(self, powers_mw: Sequence[float]) -> "CoalitionContext":
        """Same links, different relay transmit powers."""
        if len(powers_mw) != len(self.relays):
            raise ValueError(
                f"expected {len(self.relays)} relay powers, got {len(powers_mw)}"
            )
        relays = [
            RelayLink(r.g_sr, r.g_rd, float(p)) for r, p in zip(self.relays, powers_mw)
        ]
        return CoalitionContext.build(self.g_sd, relays, self.model)


def relay_mask(subset: Iterable[int] | None, n_relays: int) -> int:
    """Bitmask for a set of 1-based relay indices; None selects all relays."""
    if subset is None:
        return (1 << n_relays) - 1
    mask = 0
    for i in subset:
        if not 1 <= i <= n_relays:
            raise ValueError(f"relay index {i} outside 1..{n_relays}")
        mask |= 1 << (i - 1)
    return mask


def _selected_arrays(
    ctx: CoalitionContext, subset: Iterable[int] | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The relay arrays restricted to `subset`, in ascending relay order.

    Compressing the selection keeps the kernels free of any subset-width
    limit, so coalitions are not capped at machine-word size.
    """
    g_sr, g_rd, p_rel = ctx.relay_arrays
    if subset is None:
        return g_sr, g_rd, p_rel
    idx = sorted({int(i) for i in subset})
    for i in idx:
        if not 1 <= i <= ctx.n_relays:
            raise ValueError(f"relay index {i} outside 1..{ctx.n_relays}")
    if len(idx) == ctx.n_relays:
        return g_sr, g_rd, p_rel
    sel = np.array([i - 1 for i in idx], dtype=np.intp)
    return g_sr[sel], g_rd[sel], p_rel[sel]


def mrc_snr(p0_mw: float, ctx: CoalitionContext, subset: Iterable[int] | None = None) -> float:
    """Combined output SNR at source power `p0_mw`, with the given relays active.

    With an empty subset this reduces to the direct-transmission SNR. The
    value is continuous and strictly increasing in `p0_mw`, and increases
    when any relay with positive gains is added.
    """
    g_sr, g_rd, p_rel = _selected_arrays(ctx, subset)
    return mrc_snr_value(p0_mw, ctx.g_sd, g_sr, g_rd, p_rel, ctx.model.noise_mw)


def required_source_power(ctx: CoalitionContext, subset: Iterable[int] | None = None) -> float:
    """Minimum source power (mW) whose combined SNR meets the target.

    The root is bracketed by [0, p_d] since the direct power alone already
    meets the target, and found by bisection to 1e-12 relative tolerance.
    An empty subset returns the direct power exactly; adding relays never
    increases the result.
    """
    g_sr, g_rd, p_rel = _selected_arrays(ctx, subset)
    return solve_p0(
        ctx.g_sd, g_sr, g_rd, p_rel, ctx.model.noise_mw,
        ctx.model.snr_target, ctx.p_d_mw,
    )


def power_saving(ctx: CoalitionContext, subset: Iterable[int] | None = None) -> float:
    """Source-power reduction (mW) granted by the relay subset.

    Zero for the empty subset; monotone nondecreasing under set inclusion.
    """
    return ctx.p_d_mw - required_source_power(ctx, subset)
