"""Terrestrial network topologies with per-element failure probabilities.

A :class:`Topology` is an undirected, connected graph of named nodes with
geographic coordinates.  Every node and link carries an independent failure
probability, and the topology as a whole carries the failure probability and
extra one-way delay of the satellite uplink shared by all gateways.  Instances
are immutable; :func:`sample_failures` returns a new topology with freshly
drawn probabilities.

Link latencies are derived from great-circle length at a configurable signal
propagation speed (default 2*10^8 m/s, i.e. 200 km per millisecond).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path as FsPath

import networkx as nx

EARTH_RADIUS_KM = 6371.0
DEFAULT_SIGNAL_SPEED_KM_S = 200_000.0
DEFAULT_SAT_HOP_DELAY_MS = 125.0

#: Registry of bundled example topologies (lowercase name -> packaged file).
BUNDLED_TOPOLOGIES = {
    "nsfnet": "Nsfnet.graphml",
    "sinet": "Sinet.graphml",
    "ans": "Ans.graphml",
    "aarnet": "Aarnet.graphml",
    "agis": "Agis.graphml",
    "digex": "Digex.graphml",
    "chinanet": "Chinanet.graphml",
    "bellcanada": "BellCanada.graphml",
    "tinet": "Tinet.graphml",
}

#: Canonical display names for the bundled topologies.
DISPLAY_NAMES = {
    "nsfnet": "Nsfnet",
    "sinet": "Sinet",
    "ans": "Ans",
    "aarnet": "Aarnet",
    "agis": "Agis",
    "digex": "Digex",
    "chinanet": "Chinanet",
    "bellcanada": "BellCanada",
    "tinet": "Tinet",
}


class TopologyError(ValueError):
    """Raised for malformed, incomplete or disconnected topology input."""


@dataclass(frozen=True)
class Node:
    """A terrestrial network node.

    ``gateway_candidate`` / ``controller_candidate`` mark whether a satellite
    gateway or an SDN controller may be deployed here.  ``failure_prob`` is
    the probability that the node is unavailable, independent of all other
    elements.
    """

    id: int
    name: str
    lat: float
    lon: float
    gateway_candidate: bool = True
    controller_candidate: bool = True
    failure_prob: float = 0.0


@dataclass(frozen=True)
class Link:
    """An undirected link between two node ids with length, latency and
    failure probability."""

    u: int
    v: int
    length_km: float
    latency_ms: float
    failure_prob: float = 0.0


@dataclass(frozen=True)
class FailureCase:
    """Uniform sampling ranges for node, link and satellite-link failure
    probabilities."""

    case_id: int
    node_range: tuple[float, float]
    link_range: tuple[float, float]
    sat_range: tuple[float, float]


#: The four reference failure cases (increasing severity).
FAILURE_CASES = {
    1: FailureCase(1, (0.0, 0.05), (0.0, 0.02), (0.0, 0.02)),
    2: FailureCase(2, (0.0, 0.06), (0.0, 0.04), (0.0, 0.03)),
    3: FailureCase(3, (0.0, 0.07), (0.0, 0.06), (0.0, 0.04)),
    4: FailureCase(4, (0.0, 0.08), (0.0, 0.08), (0.0, 0.05)),
}


@dataclass(frozen=True)
class Topology:
    """Immutable topology: nodes, links and the shared satellite uplink.

    ``sat_hop_delay_ms`` is the extra one-way delay of the gateway-satellite
    hop.  It is an additive constant on top of any terrestrial path, so it
    never changes which gateway is closest to a node; it is carried for
    reporting only.
    """

    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    sat_link_failure_prob: float = 0.0
    sat_hop_delay_ms: float = DEFAULT_SAT_HOP_DELAY_MS

    def __post_init__(self) -> None:
        validate_topology(self)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def gateway_candidates(self) -> tuple[int, ...]:
        return tuple(nd.id for nd in self.nodes if nd.gateway_candidate)

    def controller_candidates(self) -> tuple[int, ...]:
        return tuple(nd.id for nd in self.nodes if nd.controller_candidate)

    def adjacency(self) -> list[list[tuple[int, float]]]:
        """Adjacency lists ``adj[u] = [(neighbor, latency_ms), ...]`` sorted
        by neighbor id.  Rebuilt on every call."""
        adj: list[list[tuple[int, float]]] = [[] for _ in self.nodes]
        for lk in self.links:
            adj[lk.u].append((lk.v, lk.latency_ms))
            adj[lk.v].append((lk.u, lk.latency_ms))
        for row in adj:
            row.sort()
        return adj

    def link_map(self) -> dict[tuple[int, int], Link]:
        """Map from the ordered endpoint pair ``(min, max)`` to the link."""
        return {(min(lk.u, lk.v), max(lk.u, lk.v)): lk for lk in self.links}


def validate_topology(topo: Topology) -> None:
    """Check all structural invariants; raise :class:`TopologyError` on the
    first violation."""
    if not topo.nodes:
        raise TopologyError("topology has no nodes")
    for i, nd in enumerate(topo.nodes):
        if nd.id != i:
            raise TopologyError(f"node ids must be 0..n-1 in order, got {nd.id} at {i}")
        if not (-90.0 <= nd.lat <= 90.0) or not (-180.0 <= nd.lon <= 180.0):
            raise TopologyError(f"node '{nd.name}' has out-of-range coordinates")
        if not 0.0 <= nd.failure_prob < 1.0:
            raise TopologyError(f"node '{nd.name}' failure probability outside [0, 1)")
    n = len(topo.nodes)
    seen: set[tuple[int, int]] = set()
    for lk in topo.links:
        if lk.u == lk.v:
            raise TopologyError(f"self-loop on node {lk.u}")
        if not (0 <= lk.u < n and 0 <= lk.v < n):
            raise TopologyError(f"link ({lk.u}, {lk.v}) references unknown node")
        key = (min(lk.u, lk.v), max(lk.u, lk.v))
        if key in seen:
            raise TopologyError(f"duplicate link between {key[0]} and {key[1]}")
        seen.add(key)
        if lk.length_km < 0 or lk.latency_ms < 0:
            raise TopologyError(f"link ({lk.u}, {lk.v}) has negative length or latency")
        if not 0.0 <= lk.failure_prob < 1.0:
            raise TopologyError(f"link ({lk.u}, {lk.v}) failure probability outside [0, 1)")
    if not 0.0 <= topo.sat_link_failure_prob < 1.0:
        raise TopologyError("satellite link failure probability outside [0, 1)")
    if topo.sat_hop_delay_ms < 0:
        raise TopologyError("satellite hop delay must be non-negative")
    if not any(nd.gateway_candidate for nd in topo.nodes):
        raise TopologyError("gateway candidate set is empty")
    if not any(nd.controller_candidate for nd in topo.nodes):
        raise TopologyError("controller candidate set is empty")
    comps = _components(topo)
    if len(comps) > 1:
        names = [sorted(topo.nodes[i].name for i in comp) for comp in comps]
        raise TopologyError(f"graph is disconnected; components: {names}")


def _components(topo: Topology) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in topo.nodes]
    for lk in topo.links:
        adj[lk.u].append(lk.v)
        adj[lk.v].append(lk.u)
    unseen = set(range(len(topo.nodes)))
    comps = []
    while unseen:
        start = min(unseen)
        stack, comp = [start], []
        unseen.discard(start)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nb in adj[cur]:
                if nb in unseen:
                    unseen.discard(nb)
                    stack.append(nb)
        comps.append(sorted(comp))
    return comps


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def link_latency_ms(length_km: float, signal_speed_km_s: float = DEFAULT_SIGNAL_SPEED_KM_S) -> float:
    """Propagation latency in milliseconds for a link of the given length."""
    if length_km < 0:
        raise ValueError("link length must be non-negative")
    if signal_speed_km_s <= 0:
        raise ValueError("signal speed must be positive")
    return length_km / signal_speed_km_s * 1000.0


def load_graphml(
    document: bytes | str,
    signal_speed_km_s: float = DEFAULT_SIGNAL_SPEED_KM_S,
    sat_link_failure_prob: float = 0.0,
    sat_hop_delay_ms: float = DEFAULT_SAT_HOP_DELAY_MS,
    gateway_candidates: set[str] | None = None,
    controller_candidates: set[str] | None = None,
) -> Topology:
    """Parse a GraphML document into a :class:`Topology`.

    Node coordinates are read from the ``Latitude`` / ``Longitude`` attributes
    and node names from ``label`` (falling back to the GraphML node id).  Node
    ids are assigned 0..n-1 in document order.  Link length comes from a
    ``length`` attribute when present, otherwise from the haversine distance
    between the endpoints; parallel links collapse to the shortest one and
    self-loops are dropped.  ``gateway_candidates`` / ``controller_candidates``
    restrict the candidate sets by node name (default: every node).
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        graph = nx.parse_graphml(document)
    except Exception as exc:
        raise TopologyError(f"malformed GraphML: {exc}") from exc

    nodes: list[Node] = []
    index: dict[str, int] = {}
    for order, (raw_id, data) in enumerate(graph.nodes(data=True)):
        name = str(data.get("label", raw_id))
        lat = data.get("Latitude")
        lon = data.get("Longitude")
        if lat is None or lon is None:
            raise TopologyError(f"node '{name}' is missing Latitude/Longitude")
        gw = gateway_candidates is None or name in gateway_candidates
        ctl = controller_candidates is None or name in controller_candidates
        index[raw_id] = order
        nodes.append(Node(order, name, float(lat), float(lon), gw, ctl))

    shortest: dict[tuple[int, int], float] = {}
    for raw_u, raw_v, data in graph.edges(data=True):
        u, v = index[raw_u], index[raw_v]
        if u == v:
            continue
        length = data.get("length", data.get("length_km"))
        if length is None:
            length = haversine_km((nodes[u].lat, nodes[u].lon), (nodes[v].lat, nodes[v].lon))
        length = float(length)
        key = (min(u, v), max(u, v))
        if key not in shortest or length < shortest[key]:
            shortest[key] = length

    links = tuple(
        Link(u, v, length, link_latency_ms(length, signal_speed_km_s))
        for (u, v), length in sorted(shortest.items())
    )
    return Topology(tuple(nodes), links, sat_link_failure_prob, sat_hop_delay_ms)


def to_json(topo: Topology) -> str:
    """Serialize a topology to the native JSON format."""
    doc = {
        "nodes": [
            {
                "id": nd.id,
                "name": nd.name,
                "lat": nd.lat,
                "lon": nd.lon,
                "gw": nd.gateway_candidate,
                "ctl": nd.controller_candidate,
                "p": nd.failure_prob,
            }
            for nd in topo.nodes
        ],
        "links": [
            {"u": lk.u, "v": lk.v, "len_km": lk.length_km, "lat_ms": lk.latency_ms, "p": lk.failure_prob}
            for lk in topo.links
        ],
        "sat": {"p": topo.sat_link_failure_prob, "delay_ms": topo.sat_hop_delay_ms},
    }
    return json.dumps(doc, indent=2)


def from_json(document: bytes | str) -> Topology:
    """Parse the native JSON topology format."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"malformed topology JSON: {exc}") from exc
    try:
        nodes = tuple(
            Node(
                int(nd["id"]),
                str(nd["name"]),
                float(nd["lat"]),
                float(nd["lon"]),
                bool(nd.get("gw", True)),
                bool(nd.get("ctl", True)),
                float(nd.get("p", 0.0)),
            )
            for nd in doc["nodes"]
        )
        links = tuple(
            Link(
                int(lk["u"]),
                int(lk["v"]),
                float(lk["len_km"]),
                float(lk["lat_ms"]),
                float(lk.get("p", 0.0)),
            )
            for lk in doc["links"]
        )
        sat = doc.get("sat", {})
        return Topology(
            nodes,
            links,
            float(sat.get("p", 0.0)),
            float(sat.get("delay_ms", DEFAULT_SAT_HOP_DELAY_MS)),
        )
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"topology JSON missing required field: {exc}") from exc


def sample_failures(topo: Topology, case: FailureCase | int, seed: int) -> Topology:
    """Return a copy of ``topo`` with failure probabilities drawn uniformly
    from the given case ranges.

    Draw order is fixed (all nodes in id order, all links in stored order,
    then the satellite link), so a seed fully determines the sample.
    """
    import numpy as np

    if isinstance(case, int):
        if case not in FAILURE_CASES:
            raise ValueError(f"unknown failure case {case}; expected one of {sorted(FAILURE_CASES)}")
        case = FAILURE_CASES[case]
    rng = np.random.default_rng(seed)
    node_p = rng.uniform(case.node_range[0], case.node_range[1], len(topo.nodes))
    link_p = rng.uniform(case.link_range[0], case.link_range[1], len(topo.links))
    sat_p = rng.uniform(case.sat_range[0], case.sat_range[1])
    nodes = tuple(
        dataclasses.replace(nd, failure_prob=float(node_p[i])) for i, nd in enumerate(topo.nodes)
    )
    links = tuple(
        dataclasses.replace(lk, failure_prob=float(link_p[i])) for i, lk in enumerate(topo.links)
    )
    return dataclasses.replace(topo, nodes=nodes, links=links, sat_link_failure_prob=float(sat_p))


def bundled_names() -> list[str]:
    """Canonical names of the bundled example topologies."""
    return [DISPLAY_NAMES[k] for k in BUNDLED_TOPOLOGIES]


def load_topology(source: str | FsPath, **kwargs) -> Topology:
    """Load a topology by bundled name or from a ``.graphml`` / ``.json`` file."""
    name = str(source).lower()
    if name in BUNDLED_TOPOLOGIES:
        data = resources.files("satplace.data").joinpath(BUNDLED_TOPOLOGIES[name]).read_bytes()
        return load_graphml(data, **kwargs)
    path = FsPath(source)
    if not path.exists():
        raise TopologyError(
            f"unknown topology '{source}'; not a bundled name ({', '.join(bundled_names())}) or a file"
        )
    if path.suffix.lower() == ".json":
        return from_json(path.read_bytes())
    return load_graphml(path.read_bytes(), **kwargs)
