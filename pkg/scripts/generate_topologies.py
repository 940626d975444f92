"""Generate the bundled GraphML topology fixtures.

Writes one file per bundled network into src/satplace/data/.  The first
fixture uses real United States city coordinates with a hand-picked link
set; the remaining fixtures are seeded synthetic networks: nodes drawn
uniformly inside a regional bounding box, connected by a minimum spanning
tree over great-circle distances plus the shortest remaining edges until
the target link count is reached.  Node and link counts per network are
fixed below.  Run from the repository root:

    python scripts/generate_topologies.py
"""

from __future__ import annotations

import math
from pathlib import Path

import networkx as nx
import numpy as np

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "satplace" / "data"

NSFNET_CITIES = [
    ("Seattle", 47.6062, -122.3321),
    ("PaloAlto", 37.4419, -122.1430),
    ("SanDiego", 32.7157, -117.1611),
    ("SaltLakeCity", 40.7608, -111.8910),
    ("Boulder", 40.0150, -105.2705),
    ("Houston", 29.7604, -95.3698),
    ("Lincoln", 40.8137, -96.7026),
    ("Champaign", 40.1164, -88.2434),
    ("AnnArbor", 42.2808, -83.7430),
    ("Pittsburgh", 40.4406, -79.9959),
    ("Atlanta", 33.7490, -84.3880),
    ("Ithaca", 42.4430, -76.5019),
    ("Princeton", 40.3573, -74.6672),
]

NSFNET_LINKS = [
    (0, 1), (0, 3), (1, 2), (1, 3), (2, 5), (3, 4), (4, 5), (4, 6),
    (5, 10), (6, 7), (7, 8), (7, 9), (8, 11), (9, 12), (9, 10),
]

# name -> (nodes, links, (lat_min, lat_max), (lon_min, lon_max), seed)
SYNTHETIC = {
    "Sinet": (13, 18, (31.5, 43.0), (130.5, 141.0), 11),
    "Ans": (18, 25, (26.0, 47.5), (-122.5, -71.0), 12),
    "Aarnet": (19, 24, (-42.8, -12.5), (115.0, 153.5), 13),
    "Agis": (25, 32, (25.8, 47.6), (-122.4, -71.1), 14),
    "Digex": (31, 35, (25.8, 47.6), (-122.4, -71.1), 15),
    "Chinanet": (42, 86, (21.0, 45.8), (81.0, 127.0), 16),
    "BellCanada": (48, 64, (43.5, 58.0), (-133.0, -60.5), 17),
    "Tinet": (53, 89, (36.5, 59.5), (-9.0, 30.0), 18),
}


def haversine_km(lat1, lon1, lat2, lon2) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * 6371.0 * math.asin(math.sqrt(a))


def build_graph(names, coords, edges) -> nx.Graph:
    graph = nx.Graph()
    for idx, (name, (lat, lon)) in enumerate(zip(names, coords)):
        graph.add_node(str(idx), label=name, Latitude=float(lat), Longitude=float(lon))
    for u, v in edges:
        graph.add_edge(str(u), str(v))
    return graph


def synthetic_edges(coords, target_links) -> list[tuple[int, int]]:
    n = len(coords)
    dist = [
        [haversine_km(coords[i][0], coords[i][1], coords[j][0], coords[j][1]) for j in range(n)]
        for i in range(n)
    ]

    # Prim's algorithm for the spanning tree.
    in_tree = {0}
    edges: list[tuple[int, int]] = []
    while len(in_tree) < n:
        best = None
        for i in in_tree:
            for j in range(n):
                if j in in_tree:
                    continue
                if best is None or dist[i][j] < dist[best[0]][best[1]]:
                    best = (i, j)
        edges.append((min(best), max(best)))
        in_tree.add(best[1])

    chosen = set(edges)
    remaining = sorted(
        ((dist[i][j], i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in chosen),
        key=lambda t: (t[0], t[1], t[2]),
    )
    for _, i, j in remaining:
        if len(edges) == target_links:
            break
        edges.append((i, j))
        chosen.add((i, j))
    if len(edges) != target_links:
        raise RuntimeError(f"cannot reach {target_links} links with {n} nodes")
    return sorted(edges)


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    names = [city for city, _, _ in NSFNET_CITIES]
    coords = [(lat, lon) for _, lat, lon in NSFNET_CITIES]
    nx.write_graphml(build_graph(names, coords, NSFNET_LINKS), OUT_DIR / "Nsfnet.graphml")
    print(f"Nsfnet: {len(names)} nodes, {len(NSFNET_LINKS)} links")

    for name, (n, m, lat_box, lon_box, seed) in SYNTHETIC.items():
        rng = np.random.default_rng(seed)
        lats = rng.uniform(lat_box[0], lat_box[1], n)
        lons = rng.uniform(lon_box[0], lon_box[1], n)
        coords = list(zip(lats, lons))
        labels = [f"{name}{i:02d}" for i in range(n)]
        edges = synthetic_edges(coords, m)
        nx.write_graphml(build_graph(labels, coords, edges), OUT_DIR / f"{name}.graphml")
        print(f"{name}: {n} nodes, {len(edges)} links")


if __name__ == "__main__":
    main()
