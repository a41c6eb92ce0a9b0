import itertools
import math

import numpy as np
import pytest

from helpers import grid_search_p0, random_context

from coalnet.channel import ChannelModel, Position
from coalnet.coalition import (
    Allocation,
    CharValue,
    NoRelays,
    PowerSavingGame,
    TooManyRelays,
    UNVIABLE,
    alpha_minmax,
    alpha_proportional,
    alpha_shapley,
    characteristic_value,
    core_bound,
    core_condition,
    excess,
    marginal_power_savings,
    shapley,
    utilities,
)
from coalnet.cooptx import CoalitionContext, RelayLink, required_source_power

MODEL = ChannelModel()


def join_order_shapley(game: PowerSavingGame) -> list[float]:
    """Oracle: average marginal saving over every join order, by enumeration."""
    n = game.n
    phi = [0.0] * n
    orders = list(itertools.permutations(range(1, n + 1)))
    for order in orders:
        present = []
        for player in order:
            before = game.value(present)
            present.append(player)
            phi[player - 1] += game.value(present) - before
    return [p / len(orders) for p in phi]


# ---------------------------------------------------------------- CharValue


def test_charvalue_ordering():
    assert UNVIABLE < CharValue(-1e12)
    assert not UNVIABLE < UNVIABLE
    assert UNVIABLE <= UNVIABLE
    assert CharValue(-2.0) < CharValue(-1.0)
    assert CharValue(3.0) >= 3.0
    assert UNVIABLE < 0.0


def test_charvalue_addition_absorbs_unviable():
    assert (UNVIABLE + 5.0) == UNVIABLE
    assert (CharValue(1.0) + UNVIABLE) == UNVIABLE
    assert sum([CharValue(1.0), CharValue(2.5)]) == CharValue(3.5)
    assert sum([CharValue(1.0), UNVIABLE, CharValue(2.5)]) == UNVIABLE
    with pytest.raises(ValueError):
        UNVIABLE.value


# ------------------------------------------------- characteristic function


def two_relay_ctx():
    return CoalitionContext.from_positions(
        Position(0.0, 0.0),
        Position(60.0, 0.0),
        [Position(-8.0, 0.0), Position(0.0, 12.0)],
        MODEL,
    )


def test_characteristic_values():
    ctx = two_relay_ctx()
    alpha = alpha_minmax(ctx).alpha
    assert characteristic_value(ctx, (), alpha) == CharValue(0.0)
    assert characteristic_value(ctx, (1,), alpha) == UNVIABLE
    assert characteristic_value(ctx, (1, 2), alpha) == UNVIABLE
    assert characteristic_value(ctx, (0,), alpha) == CharValue(-ctx.p_d_mw)
    grand = characteristic_value(ctx, (0, 1, 2), alpha)
    p0 = required_source_power(ctx)
    expected = ctx.p_d_mw - p0 - sum(alpha) * ctx.p_d_mw
    assert grand.value == pytest.approx(expected, rel=1e-12)
    # mixed proper coalitions are unviable unless diagnostics are requested
    assert characteristic_value(ctx, (0, 1), alpha) == UNVIABLE
    diag = characteristic_value(ctx, (0, 1), alpha, diagnostic_mixed=True)
    assert diag.is_finite


def test_characteristic_value_validates_players():
    ctx = two_relay_ctx()
    with pytest.raises(ValueError):
        characteristic_value(ctx, (3,), alpha_minmax(ctx).alpha)


def test_excess_unviable_and_core():
    ctx = two_relay_ctx()
    alloc = alpha_minmax(ctx)
    alpha = alloc.alpha

    def v(s):
        return characteristic_value(ctx, s, alpha)

    relay_payoffs = [u.value for u in alloc.u_mw]
    grand_value = v(frozenset({0, 1, 2})).value
    payoffs = [grand_value - sum(relay_payoffs)] + relay_payoffs

    assert excess(payoffs, (1,), v) == UNVIABLE
    for r in range(4):
        for members in itertools.combinations(range(3), r):
            e = excess(payoffs, members, v)
            assert e <= CharValue(1e-9)
    grand_excess = excess(payoffs, (0, 1, 2), v)
    assert abs(grand_excess.value) <= 1e-9


def test_core_condition_boundary():
    ctx = two_relay_ctx()
    bound = core_bound(ctx)
    assert core_condition(ctx, [0.0, 0.0])
    assert core_condition(ctx, [bound / 2, bound / 2])
    assert not core_condition(ctx, [bound / 2 + 1e-3, bound / 2])
    assert not core_condition(ctx, [-1e-6, bound / 2])


# ------------------------------------------------------------ Shapley side


def test_game_table_basics():
    ctx = two_relay_ctx()
    game = PowerSavingGame.from_context(ctx)
    assert game.value(()) == 0.0
    assert game.value((1,)) <= game.value((1, 2))
    assert game.value((2,)) <= game.value((1, 2))


def test_shapley_single_relay():
    ctx = CoalitionContext.from_positions(
        Position(0.0, 0.0), Position(50.0, 0.0), [Position(-5.0, 0.0)], MODEL
    )
    game = PowerSavingGame.from_context(ctx)
    assert shapley(game) == [game.value((1,))]


def test_shapley_symmetric_relays_split_evenly():
    twin = RelayLink(g_sr=8e-3, g_rd=7.9e-6, p_relay_mw=10.0)
    ctx = CoalitionContext.build(8e-6, [twin, twin], MODEL)
    game = PowerSavingGame.from_context(ctx)
    phi = shapley(game)
    assert phi[0] == phi[1]
    assert phi[0] == pytest.approx(game.value((1, 2)) / 2.0, rel=1e-12)


def test_shapley_dummy_relay_gets_nothing():
    useful = RelayLink(g_sr=8e-3, g_rd=7.9e-6, p_relay_mw=10.0)
    dummy = RelayLink(g_sr=1e-30, g_rd=1e-30, p_relay_mw=10.0)
    ctx = CoalitionContext.build(8e-6, [useful, dummy], MODEL)
    phi = shapley(PowerSavingGame.from_context(ctx))
    assert abs(phi[1]) <= 1e-10 * ctx.p_d_mw
    alloc = alpha_shapley(ctx)
    assert alloc.alpha[1] <= 1e-10


def test_shapley_matches_join_order_enumeration():
    rng = np.random.default_rng(21)
    for n in (2, 3, 4):
        ctx = random_context(rng, n)
        game = PowerSavingGame.from_context(ctx)
        fast = shapley(game)
        slow = join_order_shapley(game)
        for a, b in zip(fast, slow):
            assert a == pytest.approx(b, rel=1e-9, abs=1e-15)


def test_shapley_efficiency():
    rng = np.random.default_rng(22)
    for n in (1, 2, 4, 6):
        ctx = random_context(rng, n)
        game = PowerSavingGame.from_context(ctx)
        assert sum(shapley(game)) == pytest.approx(game.value(), rel=1e-9)


def test_enumeration_cap():
    links = [RelayLink(1e-3, 1e-6, 10.0)] * 21
    ctx = CoalitionContext.build(1e-5, links, MODEL)
    with pytest.raises(TooManyRelays):
        PowerSavingGame.from_context(ctx)


# ------------------------------------------------------------- allocations


def test_alpha_minmax_against_grid_oracle():
    ctx = CoalitionContext.from_positions(
        Position(0.0, 0.0), Position(50.0, 0.0), [Position(-5.0, 0.0)], MODEL
    )
    alloc = alpha_minmax(ctx)
    p0_oracle = grid_search_p0(ctx, step_rel=1e-6)
    expected = (ctx.p_d_mw - p0_oracle) / ctx.p_d_mw
    assert alloc.alpha[0] == pytest.approx(expected, abs=2e-6)
    assert alloc.u_mw[0].value == pytest.approx(-10.0 / alloc.alpha[0], rel=1e-12)


def test_alpha_minmax_properties():
    rng = np.random.default_rng(23)
    for n in (1, 2, 3, 5):
        ctx = random_context(rng, n)
        alloc = alpha_minmax(ctx)
        bound = core_bound(ctx)
        assert sum(alloc.alpha) == pytest.approx(bound, rel=1e-12)
        relay_utils = [u.value for u in alloc.u_mw]
        assert max(relay_utils) - min(relay_utils) <= 1e-9 * abs(relay_utils[0])
        assert alloc.u0_mw == pytest.approx(-ctx.p_d_mw, rel=1e-12)
        assert core_condition(ctx, alloc.alpha)


def test_alpha_minmax_identical_relays_equal():
    twin = RelayLink(g_sr=8e-3, g_rd=7.9e-6, p_relay_mw=10.0)
    ctx = CoalitionContext.build(8e-6, [twin, twin], MODEL)
    alloc = alpha_minmax(ctx)
    assert alloc.alpha[0] == alloc.alpha[1]


def test_alpha_minmax_useless_relays_get_nothing():
    dummy = RelayLink(g_sr=1e-30, g_rd=1e-30, p_relay_mw=10.0)
    ctx = CoalitionContext.build(8e-6, [dummy, dummy], MODEL)
    alloc = alpha_minmax(ctx)
    assert all(a <= 1e-9 for a in alloc.alpha)


def test_alpha_minmax_needs_relays():
    ctx = CoalitionContext.build(8e-6, [], MODEL)
    with pytest.raises(NoRelays):
        alpha_minmax(ctx)
    with pytest.raises(NoRelays):
        alpha_shapley(ctx)
    with pytest.raises(NoRelays):
        alpha_proportional(ctx, [])


def test_alpha_proportional_reduces_to_minmax_for_equal_powers():
    ctx = two_relay_ctx()
    prop = alpha_proportional(ctx, [MODEL.p_max_mw, MODEL.p_max_mw])
    mm = alpha_minmax(ctx)
    assert prop.alpha == mm.alpha


def test_alpha_proportional_scales_with_power():
    # identical links so the power ratio is the only asymmetry
    link = RelayLink(g_sr=8e-3, g_rd=7.9e-6, p_relay_mw=10.0)
    ctx = CoalitionContext.build(8e-6, [link, link], MODEL)
    alloc = alpha_proportional(ctx, [10.0, 5.0])
    assert alloc.alpha[0] == pytest.approx(2.0 * alloc.alpha[1], rel=1e-12)
    single = alpha_proportional(
        CoalitionContext.build(8e-6, [link], MODEL), [10.0]
    )
    powered = CoalitionContext.build(8e-6, [link], MODEL)
    assert single.alpha[0] == pytest.approx(core_bound(powered), rel=1e-12)


def test_marginal_power_savings_identities():
    rng = np.random.default_rng(24)
    ctx1 = random_context(rng, 1)
    savings = marginal_power_savings(ctx1)
    assert savings[0] == pytest.approx(
        ctx1.p_d_mw - required_source_power(ctx1, (1,)), rel=1e-12
    )
    ctx3 = random_context(rng, 3)
    total = ctx3.p_d_mw - required_source_power(ctx3)
    assert sum(marginal_power_savings(ctx3)) == pytest.approx(total, rel=1e-9)


def test_alpha_shapley_single_relay_matches_minmax():
    ctx = CoalitionContext.from_positions(
        Position(0.0, 0.0), Position(50.0, 0.0), [Position(-5.0, 0.0)], MODEL
    )
    assert alpha_shapley(ctx).alpha[0] == pytest.approx(
        alpha_minmax(ctx).alpha[0], rel=1e-12
    )


def test_alpha_shapley_rewards_the_more_helpful_relay():
    ctx = CoalitionContext.from_positions(
        Position(0.0, 0.0),
        Position(-50.0, 0.0),
        [Position(20.0, 0.0), Position(10.0, 0.0)],
        MODEL,
    )
    alloc = alpha_shapley(ctx)
    assert alloc.alpha[1] > alloc.alpha[0]
    savings = marginal_power_savings(ctx)
    assert savings[1] > savings[0]
    # ranking by ratio equals ranking by marginal saving
    assert sorted(range(2), key=lambda i: alloc.alpha[i]) == sorted(
        range(2), key=lambda i: savings[i]
    )


def test_alpha_shapley_colocated_relays_equal():
    ctx = CoalitionContext.from_positions(
        Position(0.0, 0.0),
        Position(-50.0, 0.0),
        [Position(20.0, 0.0), Position(20.0, 0.0)],
        MODEL,
    )
    alloc = alpha_shapley(ctx)
    assert alloc.alpha[0] == alloc.alpha[1]


def test_alpha_shapley_core_membership():
    rng = np.random.default_rng(25)
    for n in (1, 2, 4):
        ctx = random_context(rng, n)
        alloc = alpha_shapley(ctx)
        assert core_condition(ctx, alloc.alpha)
        assert sum(alloc.alpha) == pytest.approx(core_bound(ctx), rel=1e-9)
        assert alloc.u0_mw == pytest.approx(-ctx.p_d_mw, rel=1e-9)


def test_ratios_invariant_under_common_power_scaling():
    base = ChannelModel()
    scale = 7.0
    scaled = ChannelModel(
        exponent=base.exponent,
        noise_mw=base.noise_mw * scale,
        snr_target=base.snr_target,
        p_max_mw=base.p_max_mw * scale,
        reference_gain=base.reference_gain,
    )
    relays = [Position(-8.0, 0.0), Position(0.0, 12.0)]
    ctx_a = CoalitionContext.from_positions(
        Position(0.0, 0.0), Position(60.0, 0.0), relays, base
    )
    ctx_b = CoalitionContext.from_positions(
        Position(0.0, 0.0), Position(60.0, 0.0), relays, scaled
    )
    for solver in (alpha_minmax, alpha_shapley):
        a = solver(ctx_a).alpha
        b = solver(ctx_b).alpha
        for x, y in zip(a, b):
            assert y == pytest.approx(x, rel=1e-12)


def test_utilities_at_the_stability_boundary():
    ctx = two_relay_ctx()
    bound = core_bound(ctx)
    alloc = utilities(ctx, [bound / 2, bound / 2])
    assert alloc.u0_mw == pytest.approx(-ctx.p_d_mw, rel=1e-12)


def test_utilities_zero_ratio_is_unviable():
    ctx = two_relay_ctx()
    alloc = utilities(ctx, [0.0, 0.1])
    assert alloc.u_mw[0] == UNVIABLE
    assert alloc.u_mw[1].is_finite
    with pytest.raises(ValueError):
        utilities(ctx, [-0.1, 0.1])


def test_backbone_margin_shrinks_the_total():
    ctx = two_relay_ctx()
    margin = 0.01
    for solver in (alpha_minmax, alpha_shapley):
        full = solver(ctx)
        kept = solver(ctx, backbone_margin=margin)
        assert sum(kept.alpha) == pytest.approx(sum(full.alpha) - margin, rel=1e-9)
        assert kept.u0_mw > full.u0_mw
