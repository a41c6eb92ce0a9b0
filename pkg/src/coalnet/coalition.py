"""Coalition-game solver for the source-relay power-saving game.

Players are {0..N} with 0 the source (backbone) node and 1..N the relays.
The module provides characteristic values, the core condition on forwarding
ratios, the excess measure, the closed-form equal-split allocation realizing
min-max fairness, exact Shapley values of the power-saving set function by
subset enumeration, and the induced average-fairness allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterable, Sequence

import numpy as np

from ._kernels import p0_table
from .cooptx import CoalitionContext, relay_mask, required_source_power

__all__ = [
    "Allocation",
    "CharValue",
    "MAX_ENUM_RELAYS",
    "NoRelays",
    "PowerSavingGame",
    "TooManyRelays",
    "UNVIABLE",
    "alpha_minmax",
    "alpha_proportional",
    "alpha_shapley",
    "characteristic_value",
    "core_bound",
    "core_condition",
    "excess",
    "marginal_power_savings",
    "shapley",
    "utilities",
]

#: Subset enumeration is exact and costs one bisection solve per subset, so a
#: game with n relays needs 2**n solves; 20 relays (~1M solves) is the cap.
MAX_ENUM_RELAYS = 20

#: Absolute slack on the total-ratio bound, absorbing float rounding when an
#: allocation sits exactly on the stability boundary.
CORE_SLACK = 1e-9


class NoRelays(ValueError):
    """An allocation was requested for a coalition with no relays."""


class TooManyRelays(ValueError):
    """Exact subset enumeration would exceed the 2**MAX_ENUM_RELAYS cap."""


@dataclass(frozen=True)
class CharValue:
    """Worth of a coalition in mW: a finite value or the unviable marker.

    Unviable stands in for minus infinity without entering float arithmetic:
    it compares below every finite value, absorbs addition, and therefore
    can never produce a NaN through inf - inf.
    """

    value_mw: float | None = None

    @property
    def is_finite(self) -> bool:
        return self.value_mw is not None

    @property
    def value(self) -> float:
        if self.value_mw is None:
            raise ValueError("unviable coalition has no finite value")
        return self.value_mw

    def _key(self) -> tuple[int, float]:
        return (1, self.value_mw) if self.value_mw is not None else (0, 0.0)

    def __lt__(self, other: "CharValue | float") -> bool:
        return self._key() < _as_char(other)._key()

    def __le__(self, other: "CharValue | float") -> bool:
        return self._key() <= _as_char(other)._key()

    def __gt__(self, other: "CharValue | float") -> bool:
        return self._key() > _as_char(other)._key()

    def __ge__(self, other: "CharValue | float") -> bool:
        return self._key() >= _as_char(other)._key()

    def __add__(self, other: "CharValue | float") -> "CharValue":
        other = _as_char(other)
        if self.value_mw is None or other.value_mw is None:
            return UNVIABLE
        return CharValue(self.value_mw + other.value_mw)

    __radd__ = __add__


def _as_char(x: "CharValue | float") -> CharValue:
    return x if isinstance(x, CharValue) else CharValue(float(x))


UNVIABLE = CharValue(None)


@dataclass(frozen=True)
class PowerSavingGame:
    """The power-saving set function, memoized over all 2**n relay subsets.

    `savings_mw[mask]` is the source-power reduction when exactly the relays
    in `mask` assist (bit i-1 selects relay i). The empty subset saves
    nothing and the table is monotone under set inclusion.
    """

    n: int
    savings_mw: np.ndarray

    @classmethod
    def from_context(cls, ctx: CoalitionContext) -> "PowerSavingGame":
        n = ctx.n_relays
        if n > MAX_ENUM_RELAYS:
            raise TooManyRelays(
                f"{n} relays would need {1 << n} subset solves; cap is "
                f"2**{MAX_ENUM_RELAYS}"
            )
        g_sr, g_rd, p_rel = ctx.relay_arrays
        table = p0_table(
            ctx.g_sd, g_sr, g_rd, p_rel, ctx.model.noise_mw,
            ctx.model.snr_target, ctx.p_d_mw,
        )
        savings = ctx.p_d_mw - table
        savings[0] = 0.0
        return cls(n=n, savings_mw=savings)

    def value(self, subset: Iterable[int] | None = None) -> float:
        """Saving for a set of 1-based relay indices; None selects all."""
        return float(self.savings_mw[relay_mask(subset, self.n)])


def shapley(game: PowerSavingGame) -> list[float]:
    """Exact Shapley value of every relay in the power-saving game.

    Direct subset enumeration of the expected marginal contribution over
    uniformly random join orders. Satisfies efficiency (values sum to the
    grand-coalition saving), symmetry, and the dummy axiom.
    """
    n = game.n
    if n == 0:
        return []
    w = game.savings_mw
    fact = [factorial(k) for k in range(n + 1)]
    weight = [fact[s] * fact[n - 1 - s] / fact[n] for s in range(n)]
    phi = []
    for i in range(n):
        bit = 1 << i
        acc = 0.0
        for mask in range(1 << n):
            if mask & bit:
                continue
            acc += weight[mask.bit_count()] * (w[mask | bit] - w[mask])
        phi.append(float(acc))
    return phi


def characteristic_value(
    ctx: CoalitionContext,
    members: Iterable[int],
    alpha: Sequence[float],
    diagnostic_mixed: bool = False,
) -> CharValue:
    """Worth v(S) of a coalition over players {0..N}, 0 being the source.

    A lone source keeps its direct-transmission cost; relays without the
    source earn nothing and are unviable. The grand coalition is worth the
    total power saving net of the forwarding the source grants. Mixed proper
    coalitions (source plus some but not all relays) are unviable under the
    normative rule; `diagnostic_mixed=True` instead aggregates their member
    utilities the same way as the grand coalition. That mode exists only for
    sensitivity analysis and nothing in this package relies on it.
    """
    n = ctx.n_relays
    s = frozenset(members)
    for j in s:
        if not 0 <= j <= n:
            raise ValueError(f"player {j} outside 0..{n}")
    if len(alpha) != n:
        raise ValueError(f"expected {n} ratios, got {len(alpha)}")
    if not s:
        return CharValue(0.0)
    if 0 not in s:
        return UNVIABLE
    if s == {0}:
        return CharValue(-ctx.p_d_mw)
    relay_members = sorted(s - {0})
    if len(relay_members) == n:
        p0 = required_source_power(ctx)
        return CharValue(ctx.p_d_mw - p0 - sum(alpha) * ctx.p_d_mw)
    if not diagnostic_mixed:
        return UNVIABLE
    p0 = required_source_power(ctx, relay_members)
    total = CharValue(-p0 - sum(alpha[i - 1] for i in relay_members) * ctx.p_d_mw)
    for i in relay_members:
        if alpha[i - 1] <= 0.0:
            return UNVIABLE
        total = total + CharValue(-ctx.relays[i - 1].p_relay_mw / alpha[i - 1])
    return total


def excess(
    payoffs: Sequence[float],
    members: Iterable[int],
    v: Callable[[frozenset[int]], CharValue],
) -> CharValue:
    """Dissatisfaction of a coalition with payoff vector `payoffs`.

    `payoffs` is indexed over players 0..N and `v` maps a member frozenset
    to its characteristic value. An unviable coalition is never dissatisfied:
    its excess propagates as unviable. A payoff vector lies in the core
    exactly when no coalition has positive excess.
    """
    s = frozenset(members)
    val = v(s)
    if not val.is_finite:
        return UNVIABLE
    return CharValue(val.value - sum(payoffs[j] for j in s))


def core_bound(ctx: CoalitionContext) -> float:
    """Largest admissible total forwarding ratio, at the context's relay powers."""
    p0 = required_source_power(ctx)
    return (ctx.p_d_mw - p0) / ctx.p_d_mw


def core_condition(ctx: CoalitionContext, alpha: Sequence[float]) -> bool:
    """Whether ratios `alpha` keep the grand coalition stable.

    Requires every ratio nonnegative and their total no more than the share
    of source power actually saved, so the source never pays out more than
    cooperation gains it.
    """
    if len(alpha) != ctx.n_relays:
        raise ValueError(f"expected {ctx.n_relays} ratios, got {len(alpha)}")
    if any(a < 0.0 for a in alpha):
        return False
    return sum(alpha) <= core_bound(ctx) + CORE_SLACK


@dataclass(frozen=True)
class Allocation:
    """Forwarding ratios and the utilities they induce for one coalition.

    Utilities are negative powers: the source pays its reduced transmit
    power plus the forwarding it grants, and relay i pays its relay power
    stretched over the alpha_i packets it earns per packet relayed. A relay
    with a zero ratio relays without reward and is reported unviable.
    """

    alpha: tuple[float, ...]
    u0_mw: float
    u_mw: tuple[CharValue, ...]
    fairness_kind: str


def utilities(
    ctx: CoalitionContext,
    alpha: Sequence[float],
    fairness_kind: str = "custom",
) -> Allocation:
    """Source and relay utilities induced by ratios `alpha` (grand coalition)."""
    if len(alpha) != ctx.n_relays:
        raise ValueError(f"expected {ctx.n_relays} ratios, got {len(alpha)}")
    if any(a < 0.0 for a in alpha):
        raise ValueError("forwarding ratios must be nonnegative")
    p0 = required_source_power(ctx)
    u0 = -p0 - sum(alpha) * ctx.p_d_mw
    u = tuple(
        CharValue(-r.p_relay_mw / a) if a > 0.0 else UNVIABLE
        for r, a in zip(ctx.relays, alpha)
    )
    return Allocation(tuple(float(a) for a in alpha), float(u0), u, fairness_kind)


def alpha_minmax(ctx: CoalitionContext, backbone_margin: float = 0.0) -> Allocation:
    """Equal-split ratios at the stability boundary: the min-max point.

    Splitting the saved-power share equally makes every relay's utility the
    same (relays transmit at a common power), which is what minimizing the
    maximum dissatisfaction selects here. `backbone_margin` shrinks the
    total below the boundary when the source should keep a strictly
    positive gain; by default it accepts an arbitrarily small one.
    """
    n = ctx.n_relays
    if n == 0:
        raise NoRelays("min-max ratios need at least one relay")
    bound = max(core_bound(ctx) - backbone_margin, 0.0)
    a = bound * (1.0 / n)
    return utilities(ctx, (a,) * n, fairness_kind="minmax")


def alpha_proportional(
    ctx: CoalitionContext, relay_powers_mw: Sequence[float]
) -> Allocation:
    """Ratios proportional to relay transmit power, at the stability boundary.

    The saved share is computed at the given relay powers, so with equal
    powers this reduces exactly to the equal split of `alpha_minmax`.
    """
    n = ctx.n_relays
    if n == 0:
        raise NoRelays("proportional ratios need at least one relay")
    if len(relay_powers_mw) != n:
        raise ValueError(f"expected {n} relay powers, got {len(relay_powers_mw)}")
    if any(p <= 0.0 for p in relay_powers_mw):
        raise ValueError("relay powers must be positive")
    powered = ctx.with_relay_powers(relay_powers_mw)
    bound = core_bound(powered)
    total = sum(relay_powers_mw)
    alpha = tuple(bound * (p / total) for p in relay_powers_mw)
    return utilities(powered, alpha, fairness_kind="proportional")


def marginal_power_savings(ctx: CoalitionContext) -> list[float]:
    """Per-relay average power saving over uniformly random join orders.

    These are the Shapley values of the power-saving game; they sum to the
    grand-coalition saving.
    """
    return shapley(PowerSavingGame.from_context(ctx))


def alpha_shapley(ctx: CoalitionContext, backbone_margin: float = 0.0) -> Allocation:
    """Ratios proportional to each relay's average marginal power saving.

    Unlike the equal split, this grants a larger ratio to the relay whose
    channels reduce the source power more. The ratios sum to the stability
    bound, so the allocation sits in the core at its boundary.
    """
    n = ctx.n_relays
    if n == 0:
        raise NoRelays("average-fairness ratios need at least one relay")
    savings = marginal_power_savings(ctx)
    alpha = [s / ctx.p_d_mw for s in savings]
    if backbone_margin > 0.0:
        total = sum(alpha)
        if total > 0.0:
            scale = max(total - backbone_margin, 0.0) / total
            alpha = [a * scale for a in alpha]
    return utilities(ctx, tuple(alpha), fairness_kind="shapley")
