"""Shortest paths and path-reliability tables.

Builds the three matrices every placement objective consumes:

* ``d``       -- all-pairs shortest-path latency (ms), symmetric, zero diagonal
* ``r_sat``   -- per (gateway candidate, node): reliability of reaching the
                 satellite through that gateway, i.e. the terrestrial path
                 survival probability times the satellite-link survival
* ``r_ctl``   -- per (controller candidate, node): terrestrial path survival

Path survival multiplies ``(1 - p)`` over every link and every node of the
path, including both endpoints.  All tie-breaking is deterministic: among
equal-latency paths the lexicographically smallest node sequence wins, so
tables are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np

from .topology import Topology, TopologyError


@dataclass(frozen=True)
class Path:
    """A simple path as a node-id sequence with its total latency."""

    nodes: tuple[int, ...]
    latency_ms: float


@dataclass(frozen=True, eq=False)
class PathTables:
    """Latency and reliability matrices for one topology instance.

    ``r_sat`` rows follow ``gateway_ids`` order, ``r_ctl`` rows follow
    ``controller_ids`` order; ``d`` is indexed by node id on both axes.
    """

    d: np.ndarray
    r_sat: np.ndarray
    r_ctl: np.ndarray
    gateway_ids: tuple[int, ...]
    controller_ids: tuple[int, ...]

    def gateway_row(self, node_id: int) -> int:
        return self.gateway_ids.index(node_id)

    def controller_row(self, node_id: int) -> int:
        return self.controller_ids.index(node_id)


def _dijkstra(
    adj: list[list[tuple[int, float]]],
    source: int,
    target: int | None = None,
    banned_nodes: frozenset[int] = frozenset(),
    banned_edges: frozenset[tuple[int, int]] = frozenset(),
) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Dijkstra carrying full paths in the heap.

    Heap entries are ``(latency, node_sequence)``, so among equal-latency
    entries the lexicographically smallest sequence settles first.  Returns
    ``{node: (latency, path)}`` for every settled node; stops early once
    ``target`` settles.
    """
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (source,))]
    while heap:
        dist, path = heappop(heap)
        node = path[-1]
        if node in best:
            continue
        best[node] = (dist, path)
        if node == target:
            break
        for nbr, w in adj[node]:
            if nbr in best or nbr in banned_nodes:
                continue
            if (min(node, nbr), max(node, nbr)) in banned_edges:
                continue
            heappush(heap, (dist + w, path + (nbr,)))
    return best


def _path_latency(nodes: tuple[int, ...], link_map) -> float:
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += link_map[(min(a, b), max(a, b))].latency_ms
    return total


def all_pairs_shortest(topo: Topology) -> tuple[np.ndarray, list[list[int | None]]]:
    """All-pairs shortest-path latencies and predecessor trees.

    Returns ``(d, pred)`` where ``pred[s][v]`` is the node before ``v`` on the
    chosen shortest path from ``s`` (``None`` for ``v == s``).  ``d`` is
    mirrored from the lower-id source run so it is exactly symmetric despite
    floating-point summation order.
    """
    n = topo.n
    adj = topo.adjacency()
    d = np.zeros((n, n))
    pred: list[list[int | None]] = [[None] * n for _ in range(n)]
    for s in range(n):
        best = _dijkstra(adj, s)
        for v, (dist, path) in best.items():
            d[s, v] = dist
            if len(path) > 1:
                pred[s][v] = path[-2]
    for u in range(n):
        for v in range(u + 1, n):
            d[v, u] = d[u, v]
    return d, pred


def reconstruct_path(pred: list[list[int | None]], source: int, target: int) -> tuple[int, ...]:
    """Node sequence of the stored shortest path ``source -> target``."""
    seq = [target]
    while seq[-1] != source:
        prev = pred[source][seq[-1]]
        if prev is None:
            raise ValueError(f"no path from {source} to {target}")
        seq.append(prev)
    seq.reverse()
    return tuple(seq)


def yen_k_shortest(topo: Topology, u: int, v: int, k: int) -> list[Path]:
    """The ``k`` shortest loopless paths from ``u`` to ``v``.

    Paths are ordered by (latency, node sequence); fewer than ``k`` paths are
    returned when the graph does not contain that many.  ``u == v`` yields the
    single zero-length path.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = topo.n
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"path endpoints ({u}, {v}) outside node range")
    if u == v:
        return [Path((u,), 0.0)]
    adj = topo.adjacency()
    link_map = topo.link_map()

    first = _dijkstra(adj, u, target=v).get(v)
    if first is None:
        raise TopologyError(f"no path between {u} and {v}")
    accepted: list[tuple[int, ...]] = [first[1]]
    candidates: list[tuple[float, tuple[int, ...]]] = []
    seen = {first[1]}

    while len(accepted) < k:
        prev = accepted[-1]
        for i in range(len(prev) - 1):
            root = prev[: i + 1]
            spur = prev[i]
            banned_edges = frozenset(
                (min(p[i], p[i + 1]), max(p[i], p[i + 1]))
                for p in accepted
                if len(p) > i + 1 and p[: i + 1] == root
            )
            banned_nodes = frozenset(root[:-1])
            hit = _dijkstra(adj, spur, target=v, banned_nodes=banned_nodes, banned_edges=banned_edges).get(v)
            if hit is None:
                continue
            total = root[:-1] + hit[1]
            if total not in seen:
                seen.add(total)
                heappush(candidates, (_path_latency(total, link_map), total))
        if not candidates:
            break
        accepted.append(heappop(candidates)[1])
    return [Path(p, _path_latency(p, link_map)) for p in accepted]


def path_reliability(path: Path, topo: Topology, include_sat_hop: bool = False) -> float:
    """Survival probability of a path: product of ``(1 - p)`` over its links
    and over all its nodes (both endpoints included), optionally times the
    satellite-link survival."""
    link_map = topo.link_map()
    rel = 1.0
    for a, b in zip(path.nodes, path.nodes[1:]):
        link = link_map.get((min(a, b), max(a, b)))
        if link is None:
            raise TopologyError(f"path step ({a}, {b}) is not a link of the topology")
        rel *= 1.0 - link.failure_prob
    for node in path.nodes:
        rel *= 1.0 - topo.nodes[node].failure_prob
    if include_sat_hop:
        rel *= 1.0 - topo.sat_link_failure_prob
    return rel


def build_reliability_tables(topo: Topology, k_paths: int = 1) -> PathTables:
    """Build :class:`PathTables` for one topology instance.

    Each reliability entry is the best survival probability over the
    ``k_paths`` shortest paths from the node to the facility candidate; with
    the default ``k_paths=1`` it is exactly the shortest path's survival.
    Both tables share the same candidate-to-node path (chosen from the node's
    side), so ``r_sat`` equals ``r_ctl`` scaled by the satellite-link survival
    wherever the candidate sets overlap.
    """
    if k_paths < 1:
        raise ValueError("k_paths must be at least 1")
    n = topo.n
    gw_ids = tuple(sorted(topo.gateway_candidates()))
    ctl_ids = tuple(sorted(topo.controller_candidates()))
    targets = sorted(set(gw_ids) | set(ctl_ids))

    d, pred = all_pairs_shortest(topo)
    terr = {}
    for v in range(n):
        for t in targets:
            if k_paths == 1:
                path = Path(reconstruct_path(pred, v, t), float(d[v, t]))
                terr[(v, t)] = path_reliability(path, topo)
            else:
                options = yen_k_shortest(topo, v, t, k_paths)
                terr[(v, t)] = max(path_reliability(p, topo) for p in options)

    sat_ok = 1.0 - topo.sat_link_failure_prob
    r_sat = np.empty((len(gw_ids), n))
    for row, j in enumerate(gw_ids):
        for v in range(n):
            r_sat[row, v] = sat_ok * terr[(v, j)]
    r_ctl = np.empty((len(ctl_ids), n))
    for row, c in enumerate(ctl_ids):
        for v in range(n):
            r_ctl[row, v] = terr[(v, c)]
    return PathTables(d, r_sat, r_ctl, gw_ids, ctl_ids)
