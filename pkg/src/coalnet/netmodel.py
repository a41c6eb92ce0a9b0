"""Network topology, shortest-hop routing, forwarding dependencies, node
classification, and the repeated-game payoff primitives.

Nodes are identified by their index. A physical link exists wherever the
direct power budget closes; routes are shortest-hop over those links, with
ties broken deterministically by expanding neighbors in ascending id.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

import numpy as np

from .channel import ChannelModel, Position, max_direct_range

__all__ = [
    "BadDiscount",
    "DependencyGraph",
    "LinkGraph",
    "Network",
    "NodeClass",
    "RouteTable",
    "classify",
    "cooperation_sustainable",
    "dependency",
    "discounted_average_payoff",
    "generate",
    "link_graph",
    "routes",
]


class BadDiscount(ValueError):
    """Discount factor outside [0, 1)."""


class NodeClass(Enum):
    BACKBONE = "backbone"
    BOUNDARY = "boundary"
    ISOLATED = "isolated"


@dataclass(frozen=True)
class Network:
    """Node positions in a square deployment area; ids are list indices."""

    positions: tuple[Position, ...]
    area_side: float
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.positions)

    def to_json(self) -> str:
        return json.dumps(
            {
                "area_side_m": self.area_side,
                "seed": self.seed,
                "nodes": [
                    {"id": i, "x": p.x, "y": p.y}
                    for i, p in enumerate(self.positions)
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Network":
        data = json.loads(text)
        nodes = sorted(data["nodes"], key=lambda nd: nd["id"])
        if [nd["id"] for nd in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be 0..n-1 and unique")
        return cls(
            positions=tuple(Position(float(nd["x"]), float(nd["y"])) for nd in nodes),
            area_side=float(data["area_side_m"]),
            seed=data.get("seed"),
        )


def generate(n: int, area_side: float, seed: int | None = None) -> Network:
    """Place n nodes i.i.d. uniformly on the square, reproducibly from `seed`."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    if area_side <= 0.0:
        raise ValueError(f"area side must be positive, got {area_side}")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, area_side, size=(n, 2))
    positions = tuple(Position(float(x), float(y)) for x, y in xy)
    return Network(positions=positions, area_side=float(area_side), seed=seed)


@dataclass(frozen=True)
class LinkGraph:
    """Undirected feasibility graph; neighbor arrays are sorted by id."""

    neighbors: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(np.isin(j, self.neighbors[i]).item())


def link_graph(net: Network, model: ChannelModel) -> LinkGraph:
    """Join every node pair whose direct link meets the SNR target within the cap.

    Equivalent to a distance threshold at the model's maximum direct range.
    """
    n = len(net)
    pts = np.array([[p.x, p.y] for p in net.positions], dtype=np.float64)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    adj = dist <= max_direct_range(model)
    np.fill_diagonal(adj, False)
    return LinkGraph(tuple(np.flatnonzero(adj[i]).astype(np.int32) for i in range(n)))


@dataclass(frozen=True)
class RouteTable:
    """Shortest-hop routes from every source, stored as per-source trees.

    `parent[i][j]` is the predecessor of j on the i -> j route and
    `hops[i][j]` the route length in hops; both are -1 where j is
    unreachable (parent is also -1 at the source itself). Expansion order is
    ascending id, so tables are reproducible.
    """

    parent: tuple[np.ndarray, ...]
    hops: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.parent)

    def has(self, i: int, j: int) -> bool:
        return i != j and self.hops[i][j] >= 0

    def path(self, i: int, j: int) -> list[int] | None:
        """Node sequence from i to j, or None when unreachable."""
        if not self.has(i, j):
            return None
        par = self.parent[i]
        seq = [j]
        v = int(par[j])
        while v != -1:
            seq.append(v)
            v = int(par[v])
        seq.reverse()
        return seq

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Every ordered reachable pair (i, j), i != j."""
        for i, dist in enumerate(self.hops):
            for j in np.flatnonzero(dist >= 1):
                yield i, int(j)


def routes(net: Network, links: LinkGraph) -> RouteTable:
    """Breadth-first shortest-hop routes for every ordered pair in a component."""
    n = len(net)
    parents = []
    hop_counts = []
    for s in range(n):
        par = np.full(n, -1, dtype=np.int32)
        dist = np.full(n, -1, dtype=np.int32)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            nb = links.neighbors[v]
            fresh = nb[dist[nb] < 0]
            if fresh.size:
                dist[fresh] = dist[v] + 1
                par[fresh] = v
                queue.extend(fresh.tolist())
        parents.append(par)
        hop_counts.append(dist)
    return RouteTable(parent=tuple(parents), hops=tuple(hop_counts))


@dataclass(frozen=True)
class DependencyGraph:
    """Who relies on whom for packet forwarding.

    `forwarders[i]` holds every node that appears as an intermediate on some
    route of i; `first_hop[i]` is the subset adjacent to i (the forwarders i
    actually hands its packets to).
    """

    forwarders: tuple[frozenset[int], ...]
    first_hop: tuple[frozenset[int], ...]


def dependency(
    table: RouteTable,
    destinations: Mapping[int, Sequence[int]] | None = None,
) -> DependencyGraph:
    """Forwarding dependencies induced by the routes.

    By default every node addresses all other nodes reachable from it; pass
    `destinations` to restrict traffic to chosen targets per source.
    """
    n = len(table)
    fwd: list[frozenset[int]] = []
    first: list[frozenset[int]] = []
    for i in range(n):
        par = table.parent[i]
        dist = table.hops[i]
        if destinations is None:
            # With all-reachable traffic a node forwards for i exactly when it
            # has a child in i's route tree, i.e. it is some deep node's parent.
            deep = np.flatnonzero(dist >= 2)
            inter = set(np.unique(par[deep]).tolist()) if deep.size else set()
        else:
            inter = set()
            for j in destinations.get(i, ()):
                if j == i or dist[j] < 0:
                    continue
                v = int(par[j])
                while v != i and v != -1:
                    inter.add(v)
                    v = int(par[v])
        fwd.append(frozenset(inter))
        first.append(frozenset(f for f in inter if dist[f] == 1))
    return DependencyGraph(forwarders=tuple(fwd), first_hop=tuple(first))


def classify(dep: DependencyGraph, links: LinkGraph) -> tuple[NodeClass, ...]:
    """Backbone / boundary / isolated classification.

    A node that needs forwarders is a boundary node when none of its
    first-hop forwarders depends on it in return; reciprocal dependency is
    what makes forwarding enforceable, so everyone else with a link is
    backbone.
    """
    out = []
    for i in range(len(links)):
        if links.neighbors[i].size == 0:
            out.append(NodeClass.ISOLATED)
        elif dep.forwarders[i] and not any(
            i in dep.forwarders[f] for f in dep.first_hop[i]
        ):
            out.append(NodeClass.BOUNDARY)
        else:
            out.append(NodeClass.BACKBONE)
    return tuple(out)


def discounted_average_payoff(stream: Sequence[float], beta: float) -> float:
    """Discounted average of a per-period payoff stream.

    The final entry repeats forever, so the infinite tail sums in closed
    form instead of being truncated; a constant stream averages to itself
    for any discount factor.
    """
    if not 0.0 <= beta < 1.0:
        raise BadDiscount(f"discount factor {beta} outside [0, 1)")
    if len(stream) == 0:
        raise ValueError("payoff stream is empty")
    total = 0.0
    for t, u in enumerate(stream[:-1]):
        total += (1.0 - beta) * beta**t * u
    return total + beta ** (len(stream) - 1) * stream[-1]


def cooperation_sustainable(
    cheat_gain: float,
    coop_gain: float,
    punish_payoff: float,
    beta: float,
) -> bool:
    """Whether permanent cooperation beats a one-shot deviation.

    Grim-trigger comparison: deviating earns `cheat_gain` once and
    `punish_payoff` forever after, while cooperating earns `coop_gain` every
    period. True when the deviation's discounted average is no better.
    """
    deviate = discounted_average_payoff([cheat_gain, punish_payoff], beta)
    stay = discounted_average_payoff([coop_gain], beta)
    return deviate <= stay
