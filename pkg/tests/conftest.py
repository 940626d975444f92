"""Shared fixtures: small hand-built topologies and random geometric ones."""

from __future__ import annotations

import numpy as np
import pytest

from satplace.topology import Link, Node, Topology


def make_topology(coords, edges, node_probs=None, link_probs=None, sat_prob=0.0,
                  gateway_ok=None, controller_ok=None, lengths=None):
    """Build a Topology from (lat, lon) coords and an edge list; link lengths
    default to 100 km each so latencies are 0.5 ms per hop."""
    nodes = []
    for idx, (lat, lon) in enumerate(coords):
        nodes.append(
            Node(
                id=idx,
                name=f"n{idx}",
                lat=lat,
                lon=lon,
                gateway_candidate=gateway_ok[idx] if gateway_ok else True,
                controller_candidate=controller_ok[idx] if controller_ok else True,
                failure_prob=node_probs[idx] if node_probs else 0.0,
            )
        )
    links = []
    for pos, (u, v) in enumerate(edges):
        length = lengths[pos] if lengths else 100.0
        links.append(
            Link(
                u=min(u, v),
                v=max(u, v),
                length_km=length,
                latency_ms=length / 200_000.0 * 1000.0,
                failure_prob=link_probs[pos] if link_probs else 0.0,
            )
        )
    return Topology(nodes=tuple(nodes), links=tuple(links), sat_link_failure_prob=sat_prob)


def line_topology(k: int, **kwargs) -> Topology:
    coords = [(10.0 + i, 20.0 + i) for i in range(k)]
    edges = [(i, i + 1) for i in range(k - 1)]
    return make_topology(coords, edges, **kwargs)


def random_topology(n: int, seed: int, extra_edges: int = 2, with_probs: bool = True) -> Topology:
    """Connected random topology: a random spanning tree plus extra chords,
    with failure probabilities drawn when requested."""
    rng = np.random.default_rng(seed)
    coords = [(float(rng.uniform(-50, 50)), float(rng.uniform(-120, 120))) for _ in range(n)]
    edges = set()
    order = list(rng.permutation(n))
    for a, b in zip(order, order[1:]):
        edges.add((min(a, b), max(a, b)))
    while len(edges) < min(n - 1 + extra_edges, n * (n - 1) // 2):
        a, b = rng.integers(0, n, 2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))
    edges = sorted(edges)
    node_probs = [float(p) for p in rng.uniform(0.0, 0.08, n)] if with_probs else None
    link_probs = [float(p) for p in rng.uniform(0.0, 0.06, len(edges))] if with_probs else None
    lengths = [float(rng.uniform(50.0, 900.0)) for _ in edges]
    return make_topology(
        coords,
        edges,
        node_probs=node_probs,
        link_probs=link_probs,
        sat_prob=float(rng.uniform(0.0, 0.05)) if with_probs else 0.0,
        lengths=lengths,
    )


@pytest.fixture(scope="session")
def nsfnet():
    from satplace.topology import load_topology

    return load_topology("nsfnet")


@pytest.fixture(scope="session")
def nsfnet_tables(nsfnet):
    from satplace.paths import build_reliability_tables

    return build_reliability_tables(nsfnet)
