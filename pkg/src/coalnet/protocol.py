"""Joint repeated-game / coalition-game forwarding protocol.

The six steps: (1) route discovery, (2) forwarding enforcement among
backbone nodes through their mutual dependency (assumed honored here),
(3) neighbor discovery for boundary nodes, (4) coalition formation with a
neighboring backbone node, (5) relay commitment for the backbone's flow,
and (6) forwarding entitlement for the boundary node's own packets. The
connectivity helpers then count who can actually reach their destinations,
with and without the coalitions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import coalition, cooptx, netmodel
from .channel import ChannelModel, distance
from .netmodel import (
    DependencyGraph,
    LinkGraph,
    Network,
    NodeClass,
    RouteTable,
)

__all__ = [
    "AssignmentEntry",
    "BackboneCandidate",
    "CoalitionAssignment",
    "ConnectivityReport",
    "ConnectivitySummary",
    "NetworkState",
    "NoCandidates",
    "TrialRecord",
    "connected_counts",
    "connectivity",
    "monte_carlo_connectivity",
    "run_protocol",
    "select_backbone",
]

#: A coalition only counts toward connectivity when the backbone's source
#: power strictly decreases; this absolute slack (mW) guards the comparison.
POWER_SLACK_MW = 1e-12

#: Average-fairness ratios cost one solve per relay subset (2**size), so a
#: backbone evaluated under shapley fairness stops accepting members at this
#: size. The min-max split has a closed form and needs no cap.
MAX_SHAPLEY_COALITION = 8

_FAIRNESS = {
    "minmax": coalition.alpha_minmax,
    "shapley": coalition.alpha_shapley,
}


class NoCandidates(ValueError):
    """A backbone choice was requested with an empty candidate list."""


@dataclass(frozen=True)
class NetworkState:
    """A network bundled with its routing and classification artifacts."""

    net: Network
    model: ChannelModel
    links: LinkGraph
    table: RouteTable
    deps: DependencyGraph
    classes: tuple[NodeClass, ...]
    destinations: Mapping[int, Sequence[int]] | None = None

    @classmethod
    def build(
        cls,
        net: Network,
        model: ChannelModel,
        destinations: Mapping[int, Sequence[int]] | None = None,
    ) -> "NetworkState":
        links = netmodel.link_graph(net, model)
        table = netmodel.routes(net, links)
        deps = netmodel.dependency(table, destinations)
        classes = netmodel.classify(deps, links)
        return cls(net, model, links, table, deps, classes, destinations)


@dataclass(frozen=True)
class BackboneCandidate:
    """One coalition option for a boundary node, scored for selection."""

    backbone_id: int
    achievable_alpha: float
    coalition_size: int
    distance_m: float


def select_backbone(boundary_id: int, candidates: Sequence[BackboneCandidate]) -> int:
    """Deterministic backbone choice for a boundary node.

    Preference order: the largest achievable forwarding ratio, then the less
    crowded coalition, then the nearer backbone, then the lower id.
    """
    if not candidates:
        raise NoCandidates(f"boundary node {boundary_id} has no backbone candidates")
    best = min(
        candidates,
        key=lambda c: (-c.achievable_alpha, c.coalition_size, c.distance_m, c.backbone_id),
    )
    return best.backbone_id


@dataclass(frozen=True)
class AssignmentEntry:
    """Outcome of coalition formation for one boundary node."""

    boundary_id: int
    backbone_id: int | None
    fairness: str
    alpha: float
    relay_power_mw: float
    flow_dest: int | None
    p0_before_mw: float | None
    p0_after_mw: float | None
    power_reduced: bool


@dataclass(frozen=True)
class CoalitionAssignment:
    """Per-boundary-node coalition outcomes for one network."""

    fairness: str
    entries: tuple[AssignmentEntry, ...]

    def entry(self, boundary_id: int) -> AssignmentEntry:
        for e in self.entries:
            if e.boundary_id == boundary_id:
                return e
        raise KeyError(f"node {boundary_id} is not a boundary node here")

    def assigned(self) -> Iterator[AssignmentEntry]:
        return (e for e in self.entries if e.backbone_id is not None)

    def to_jsonable(self) -> dict:
        """JSON-ready dict; flat entry dicts double as CSV rows."""
        return {
            "fairness": self.fairness,
            "entries": [dataclasses.asdict(e) for e in self.entries],
        }


@dataclass(frozen=True)
class _CoalitionOutcome:
    backbone_id: int
    flow_dest: int | None
    members: tuple[int, ...]
    p_d_mw: float | None
    p0_mw: float | None
    alpha: tuple[float, ...]


def _flow_candidates(state: NetworkState, backbone: int) -> np.ndarray:
    """Next-hop nodes the backbone transmits to, ascending by id."""
    if state.destinations is None:
        return state.links.neighbors[backbone]
    hops = state.table.hops[backbone]
    firsts = set()
    for j in state.destinations.get(backbone, ()):
        if j != backbone and hops[j] >= 1:
            path = state.table.path(backbone, j)
            firsts.add(path[1])
    return np.array(sorted(firsts), dtype=np.int32)


def _select_flow(state: NetworkState, backbone: int, exclude: set[int]) -> int | None:
    """The backbone's farthest next-hop outside `exclude`; ties favor lower id."""
    pos = state.net.positions
    best = None
    best_d = -1.0
    for v in _flow_candidates(state, backbone):
        v = int(v)
        if v in exclude:
            continue
        d = distance(pos[backbone], pos[v])
        if d > best_d:
            best, best_d = v, d
    return best


def _form_coalition(
    state: NetworkState, backbone: int, members: Sequence[int], fairness: str
) -> _CoalitionOutcome:
    """Joint coalition outcome for a backbone and its relay members.

    The assisted flow is the backbone's highest-direct-power hop, excluding
    the members themselves: a relay cannot assist a transmission addressed
    to itself. If every next-hop is a member, the flow goes to the farthest
    member and that member is left out of the relay set.
    """
    members = tuple(sorted(members))
    flow = _select_flow(state, backbone, set(members))
    if flow is None:
        flow = _select_flow(state, backbone, set())
        if flow is None:
            return _CoalitionOutcome(backbone, None, (), None, None, ())
        members = tuple(m for m in members if m != flow)
    pos = state.net.positions
    ctx = cooptx.CoalitionContext.from_positions(
        pos[backbone], pos[flow], [pos[m] for m in members], state.model
    )
    if not members:
        return _CoalitionOutcome(backbone, flow, (), ctx.p_d_mw, ctx.p_d_mw, ())
    alloc = _FAIRNESS[fairness](ctx)
    p0 = cooptx.required_source_power(ctx)
    return _CoalitionOutcome(backbone, flow, members, ctx.p_d_mw, p0, alloc.alpha)


def run_protocol(state: NetworkState, fairness: str = "minmax") -> CoalitionAssignment:
    """Form coalitions for every boundary node that has a backbone neighbor.

    Boundary nodes arrive in ascending id. Each evaluates its neighboring
    backbone nodes by the ratio it would get when joining that backbone's
    current coalition, picks one via `select_backbone`, and after all
    arrivals each coalition's ratios are recomputed jointly under the
    configured fairness. Boundary nodes without a backbone neighbor simply
    remain unassigned.
    """
    if fairness not in _FAIRNESS:
        raise ValueError(f"unknown fairness {fairness!r}; use one of {sorted(_FAIRNESS)}")
    pos = state.net.positions
    boundary = [i for i, c in enumerate(state.classes) if c is NodeClass.BOUNDARY]
    chosen: dict[int, list[int]] = {}
    pick: dict[int, int | None] = {}
    for b in boundary:
        candidates = []
        for k in state.links.neighbors[b]:
            k = int(k)
            if state.classes[k] is not NodeClass.BACKBONE:
                continue
            current = chosen.get(k, [])
            if fairness == "shapley" and len(current) >= MAX_SHAPLEY_COALITION:
                continue
            trial = _form_coalition(state, k, current + [b], fairness)
            if b in trial.members:
                achievable = trial.alpha[trial.members.index(b)]
            else:
                achievable = 0.0
            candidates.append(
                BackboneCandidate(
                    backbone_id=k,
                    achievable_alpha=achievable,
                    coalition_size=len(current),
                    distance_m=distance(pos[b], pos[k]),
                )
            )
        if not candidates:
            pick[b] = None
            continue
        k = select_backbone(b, candidates)
        pick[b] = k
        chosen.setdefault(k, []).append(b)

    outcomes = {
        k: _form_coalition(state, k, members, fairness)
        for k, members in chosen.items()
    }
    entries = []
    for b in boundary:
        k = pick[b]
        outcome = outcomes.get(k) if k is not None else None
        if outcome is None or b not in outcome.members:
            entries.append(
                AssignmentEntry(b, None, fairness, 0.0, state.model.p_max_mw,
                                None, None, None, False)
            )
            continue
        idx = outcome.members.index(b)
        reduced = outcome.p_d_mw - outcome.p0_mw > POWER_SLACK_MW
        entries.append(
            AssignmentEntry(
                boundary_id=b,
                backbone_id=k,
                fairness=fairness,
                alpha=outcome.alpha[idx],
                relay_power_mw=state.model.p_max_mw,
                flow_dest=outcome.flow_dest,
                p0_before_mw=outcome.p_d_mw,
                p0_after_mw=outcome.p0_mw,
                power_reduced=reduced,
            )
        )
    return CoalitionAssignment(fairness=fairness, entries=tuple(entries))


def connected_counts(state: NetworkState, fairness: str = "minmax") -> tuple[int, int]:
    """Connected-node counts (without coalitions, with coalitions).

    Without coalitions a node is connected when it is backbone, which covers
    every node that needs no forwarder at all; boundary nodes are refused
    service and isolated nodes have no one to talk to. Coalitions
    additionally connect each boundary node whose assignment strictly
    reduces its backbone's source power.
    """
    base = sum(1 for c in state.classes if c is NodeClass.BACKBONE)
    assignment = run_protocol(state, fairness)
    extra = sum(
        1 for e in assignment.entries if e.backbone_id is not None and e.power_reduced
    )
    return base, base + extra


def connectivity(
    net: Network,
    model: ChannelModel,
    mode: str = "coalition",
    fairness: str = "minmax",
    destinations: Mapping[int, Sequence[int]] | None = None,
) -> float:
    """Fraction of nodes able to reach their destinations through willing forwarders."""
    state = NetworkState.build(net, model, destinations)
    base, with_coalitions = connected_counts(state, fairness)
    if mode == "no-coalition":
        return base / len(net)
    if mode == "coalition":
        return with_coalitions / len(net)
    raise ValueError(f"unknown mode {mode!r}; use 'coalition' or 'no-coalition'")


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo trial's connectivity accounting."""

    n: int
    area_side_m: float
    trial: int
    seed: int
    connected_no_coalition: int
    connected_coalition: int


@dataclass(frozen=True)
class ConnectivitySummary:
    """Aggregate connectivity for one (node count, area side) sweep point."""

    n: int
    area_side_m: float
    trials: int
    mean_no_coalition: float
    stderr_no_coalition: float
    mean_coalition: float
    stderr_coalition: float
    relative_improvement: float | None


@dataclass(frozen=True)
class ConnectivityReport:
    """Per-trial records and per-area aggregates for a connectivity sweep."""

    fairness: str
    records: tuple[TrialRecord, ...]
    summaries: tuple[ConnectivitySummary, ...]

    def to_jsonable(self) -> dict:
        return {
            "fairness": self.fairness,
            "trials": [dataclasses.asdict(r) for r in self.records],
            "summaries": [dataclasses.asdict(s) for s in self.summaries],
        }


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def monte_carlo_connectivity(
    n: int,
    area_sides_m: Sequence[float],
    trials: int,
    seed: int,
    fairness: str = "minmax",
    model: ChannelModel | None = None,
) -> ConnectivityReport:
    """Connectivity statistics over independent random networks.

    Each (area, trial) point gets its own network seed derived from the
    master seed, so a report is fully reproducible. Within every trial the
    coalition count can only add to the no-coalition count, so the
    with-coalitions curve dominates pointwise.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    if model is None:
        model = ChannelModel()
    rng = np.random.default_rng(seed)
    trial_seeds = rng.integers(0, 2**63 - 1, size=(len(area_sides_m), trials))
    records = []
    summaries = []
    for bi, area in enumerate(area_sides_m):
        frac_nc = np.empty(trials)
        frac_co = np.empty(trials)
        for t in range(trials):
            trial_seed = int(trial_seeds[bi, t])
            net = netmodel.generate(n, area, trial_seed)
            state = NetworkState.build(net, model)
            base, with_co = connected_counts(state, fairness)
            frac_nc[t] = base / n
            frac_co[t] = with_co / n
            records.append(
                TrialRecord(n, float(area), t, trial_seed, base, with_co)
            )
        mean_nc = float(frac_nc.mean())
        mean_co = float(frac_co.mean())
        improvement = (mean_co - mean_nc) / mean_nc if mean_nc > 0.0 else None
        summaries.append(
            ConnectivitySummary(
                n=n,
                area_side_m=float(area),
                trials=trials,
                mean_no_coalition=mean_nc,
                stderr_no_coalition=_stderr(frac_nc),
                mean_coalition=mean_co,
                stderr_coalition=_stderr(frac_co),
                relative_improvement=improvement,
            )
        )
    return ConnectivityReport(
        fairness=fairness, records=tuple(records), summaries=tuple(summaries)
    )
