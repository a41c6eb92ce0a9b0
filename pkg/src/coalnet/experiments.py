"""Scenario sweeps behind the CLI.

Four experiments: the forwarding-ratio and source-power curves versus relay
distance under min-max fairness, the two-relay location sweep under average
fairness, and the connectivity Monte Carlo. Plus a one-shot solver that
reports a full coalition instance as JSON-ready data.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from . import coalition, cooptx, protocol
from .channel import ChannelModel, Position

__all__ = [
    "ratio_distance_sweep",
    "shapley_location_sweep",
    "connectivity_sweep",
    "solve_scenario",
]

# Relays sit on an arc behind the source, away from the destination; their
# bearing is drawn uniformly on the arc each iteration while the arc radius
# is swept deterministically.
ARC_START = 0.5 * math.pi
ARC_END = 1.5 * math.pi


def ratio_distance_sweep(
    model: ChannelModel,
    dest_distances_m: Sequence[float],
    relay_counts: Sequence[int],
    relay_distances_m: Sequence[float],
    iterations: int,
    seed: int,
) -> list[dict]:
    """Mean equal-split ratio and source power per sweep point.

    One row per (destination distance, relay count, relay distance) with the
    Monte Carlo mean and standard error of both the per-relay ratio and the
    grand-coalition source power.
    """
    if iterations < 1:
        raise ValueError(f"need at least one iteration, got {iterations}")
    rng = np.random.default_rng(seed)
    rows = []
    for dest_d in dest_distances_m:
        source = Position(0.0, 0.0)
        dest = Position(float(dest_d), 0.0)
        for n_rel in relay_counts:
            for relay_d in relay_distances_m:
                angles = rng.uniform(ARC_START, ARC_END, size=(iterations, n_rel))
                alphas = np.empty(iterations)
                p0s = np.empty(iterations)
                for it in range(iterations):
                    relay_pos = [
                        Position(relay_d * math.cos(a), relay_d * math.sin(a))
                        for a in angles[it]
                    ]
                    ctx = cooptx.CoalitionContext.from_positions(
                        source, dest, relay_pos, model
                    )
                    p0 = cooptx.required_source_power(ctx)
                    p0s[it] = p0
                    alphas[it] = (ctx.p_d_mw - p0) / (n_rel * ctx.p_d_mw)
                rows.append(
                    {
                        "dest_distance": float(dest_d),
                        "N": int(n_rel),
                        "relay_distance": float(relay_d),
                        "mean_alpha": float(alphas.mean()),
                        "stderr_alpha": _stderr(alphas),
                        "mean_P0": float(p0s.mean()),
                        "stderr_P0": _stderr(p0s),
                    }
                )
    return rows


def shapley_location_sweep(
    model: ChannelModel,
    node1_x_m: Sequence[float],
    node2_x_m: Sequence[float],
    dest_x_m: float = -50.0,
) -> list[dict]:
    """Average-fairness ratios for two relays on a line through the source.

    The source sits at the origin and transmits toward negative x; the two
    relays sit on the positive axis at the given offsets. Deterministic, so
    no seed is involved.
    """
    source = Position(0.0, 0.0)
    dest = Position(float(dest_x_m), 0.0)
    rows = []
    for x1 in node1_x_m:
        for x2 in node2_x_m:
            ctx = cooptx.CoalitionContext.from_positions(
                source,
                dest,
                [Position(float(x1), 0.0), Position(float(x2), 0.0)],
                model,
            )
            alloc = coalition.alpha_shapley(ctx)
            rows.append(
                {
                    "node1_x": float(x1),
                    "node2_x": float(x2),
                    "alpha_1": alloc.alpha[0],
                    "alpha_2": alloc.alpha[1],
                }
            )
    return rows


def connectivity_sweep(
    model: ChannelModel,
    node_counts: Sequence[int],
    area_sides_m: Sequence[float],
    trials: int,
    seed: int,
    fairness: str,
) -> tuple[list[dict], list[protocol.ConnectivityReport]]:
    """Connectivity with and without coalitions across network sizes.

    Returns flat CSV-ready rows (two per sweep point, one per mode) plus the
    full per-node-count reports for JSON emission.
    """
    rng = np.random.default_rng(seed)
    sub_seeds = rng.integers(0, 2**63 - 1, size=len(node_counts))
    rows = []
    reports = []
    for n, sub_seed in zip(node_counts, sub_seeds):
        report = protocol.monte_carlo_connectivity(
            int(n), area_sides_m, trials, int(sub_seed), fairness, model
        )
        reports.append(report)
        for s in report.summaries:
            rows.append(
                {
                    "n": s.n,
                    "B": s.area_side_m,
                    "mode": "no-coalition",
                    "mean_connectivity": s.mean_no_coalition,
                    "stderr": s.stderr_no_coalition,
                }
            )
            rows.append(
                {
                    "n": s.n,
                    "B": s.area_side_m,
                    "mode": "coalition",
                    "mean_connectivity": s.mean_coalition,
                    "stderr": s.stderr_coalition,
                }
            )
    return rows, reports


def _context_from_scenario(scenario: Mapping, model: ChannelModel) -> cooptx.CoalitionContext:
    if "gains" in scenario:
        gains = scenario["gains"]
        relays = [
            cooptx.RelayLink(
                g_sr=float(r["g_sr"]),
                g_rd=float(r["g_rd"]),
                p_relay_mw=float(r.get("p_mw", model.p_max_mw)),
            )
            for r in gains.get("relays", [])
        ]
        return cooptx.CoalitionContext.build(float(gains["g_sd"]), relays, model)
    source = Position(*map(float, scenario["source"]))
    dest = Position(*map(float, scenario["destination"]))
    relay_pos = [Position(*map(float, p)) for p in scenario.get("relays", [])]
    p_rel = scenario.get("relay_power_mw")
    return cooptx.CoalitionContext.from_positions(
        source, dest, relay_pos, model, None if p_rel is None else float(p_rel)
    )


def _allocation_block(ctx: cooptx.CoalitionContext, alloc: coalition.Allocation) -> dict:
    return {
        "alpha": list(alloc.alpha),
        "sum_alpha": sum(alloc.alpha),
        "u0_mw": alloc.u0_mw,
        "relay_utilities_mw": [
            u.value_mw if u.is_finite else None for u in alloc.u_mw
        ],
        "core_ok": coalition.core_condition(ctx, alloc.alpha),
    }


def solve_scenario(scenario: Mapping) -> dict:
    """One-shot coalition solve from explicit geometry or explicit gains.

    Reports the direct power, the source power and saving for every relay
    subset, both fairness allocations with their utilities, and the core
    verdicts. Limited to the exact-enumeration relay cap.
    """
    channel_cfg = scenario.get("channel", {})
    model = ChannelModel.from_db(
        exponent=float(channel_cfg.get("exponent", 3.0)),
        noise_dbm=float(channel_cfg.get("noise_dbm", -60.0)),
        snr_target_db=float(channel_cfg.get("snr_target_db", 10.0)),
        p_max_dbm=float(channel_cfg.get("p_max_dbm", 10.0)),
        reference_gain=float(channel_cfg.get("reference_gain", 1.0)),
    )
    ctx = _context_from_scenario(scenario, model)
    game = coalition.PowerSavingGame.from_context(ctx)
    n = ctx.n_relays
    subsets = []
    for mask in range(1 << n):
        members = [i + 1 for i in range(n) if mask >> i & 1]
        p0 = ctx.p_d_mw - float(game.savings_mw[mask])
        subsets.append(
            {
                "relays": members,
                "p0_mw": p0,
                "saving_mw": float(game.savings_mw[mask]),
            }
        )
    result = {
        "n_relays": n,
        "p_d_mw": ctx.p_d_mw,
        "subsets": subsets,
    }
    if n > 0:
        result["minmax"] = _allocation_block(ctx, coalition.alpha_minmax(ctx))
        shap = coalition.alpha_shapley(ctx)
        block = _allocation_block(ctx, shap)
        block["marginal_savings_mw"] = coalition.marginal_power_savings(ctx)
        result["shapley"] = block
    else:
        result["minmax"] = {"alpha": [], "sum_alpha": 0.0}
        result["shapley"] = {"alpha": [], "sum_alpha": 0.0}
    return result


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))
