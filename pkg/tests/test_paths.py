import numpy as np
import pytest

from satplace.paths import (
    Path,
    all_pairs_shortest,
    build_reliability_tables,
    path_reliability,
    reconstruct_path,
    yen_k_shortest,
)

from conftest import make_topology, random_topology
from oracles import enumerate_simple_paths, floyd_warshall_latency, path_survival


def diamond():
    """Two equal-latency routes 0-1-3 and 0-2-3 plus a long chord."""
    return make_topology(
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
        [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)],
        lengths=[100.0, 100.0, 100.0, 100.0, 350.0],
    )


class TestShortestPaths:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_floyd_warshall(self, seed):
        topo = random_topology(9, seed=seed, extra_edges=4)
        d, _ = all_pairs_shortest(topo)
        assert np.allclose(d, floyd_warshall_latency(topo), atol=1e-9)

    def test_distance_matrix_exactly_symmetric(self):
        topo = random_topology(11, seed=42, extra_edges=5)
        d, _ = all_pairs_shortest(topo)
        assert (d == d.T).all()

    def test_predecessors_reconstruct_valid_paths(self):
        topo = random_topology(8, seed=3, extra_edges=3)
        d, pred = all_pairs_shortest(topo)
        link_map = topo.link_map()
        for s in range(topo.n):
            for t in range(topo.n):
                nodes = reconstruct_path(pred, s, t)
                assert nodes[0] == s and nodes[-1] == t
                total = sum(
                    link_map[(min(a, b), max(a, b))].latency_ms
                    for a, b in zip(nodes, nodes[1:])
                )
                assert total == pytest.approx(d[s, t], abs=1e-9)

    def test_equal_cost_tie_prefers_lexicographic_route(self):
        topo = diamond()
        _, pred = all_pairs_shortest(topo)
        assert reconstruct_path(pred, 0, 3) == (0, 1, 3)


class TestYen:
    @pytest.mark.parametrize("seed", range(4))
    def test_first_k_match_exhaustive_enumeration(self, seed):
        topo = random_topology(7, seed=seed, extra_edges=3)
        expected = enumerate_simple_paths(topo, 0, topo.n - 1)
        got = yen_k_shortest(topo, 0, topo.n - 1, k=4)
        for path, (nodes, latency) in zip(got, expected[:4]):
            assert path.nodes == nodes
            assert path.latency_ms == pytest.approx(latency, abs=1e-9)

    def test_paths_are_simple_and_distinct(self):
        topo = random_topology(8, seed=9, extra_edges=4)
        paths = yen_k_shortest(topo, 1, 6, k=5)
        seen = set()
        for path in paths:
            assert len(set(path.nodes)) == len(path.nodes)
            assert path.nodes not in seen
            seen.add(path.nodes)

    def test_latencies_non_decreasing(self):
        topo = random_topology(8, seed=5, extra_edges=4)
        paths = yen_k_shortest(topo, 0, 7, k=6)
        latencies = [p.latency_ms for p in paths]
        assert latencies == sorted(latencies)

    def test_k_larger_than_path_count(self):
        topo = make_topology([(0, 0), (1, 1)], [(0, 1)])
        assert len(yen_k_shortest(topo, 0, 1, k=10)) == 1

    def test_source_equals_target(self):
        topo = diamond()
        paths = yen_k_shortest(topo, 2, 2, k=3)
        assert paths == [Path(nodes=(2,), latency_ms=0.0)]

    def test_tie_order_is_lexicographic(self):
        topo = diamond()
        paths = yen_k_shortest(topo, 0, 3, k=3)
        assert [p.nodes for p in paths] == [(0, 1, 3), (0, 2, 3), (0, 3)]


class TestPathReliability:
    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("with_sat", [False, True])
    def test_matches_literal_product(self, seed, with_sat):
        topo = random_topology(7, seed=seed, extra_edges=3)
        for path in yen_k_shortest(topo, 0, 5, k=3):
            expected = path_survival(path.nodes, topo, with_sat)
            assert path_reliability(path, topo, include_sat_hop=with_sat) == pytest.approx(
                expected, abs=1e-12
            )

    def test_single_node_path(self):
        topo = make_topology([(0, 0), (1, 1)], [(0, 1)], node_probs=[0.1, 0.0], sat_prob=0.2)
        lonely = Path(nodes=(0,), latency_ms=0.0)
        assert path_reliability(lonely, topo) == pytest.approx(0.9)
        assert path_reliability(lonely, topo, include_sat_hop=True) == pytest.approx(0.9 * 0.8)

    def test_known_two_node_value(self):
        topo = make_topology(
            [(0, 0), (1, 1)], [(0, 1)], node_probs=[0.05, 0.05], link_probs=[0.02], sat_prob=0.02
        )
        path = Path(nodes=(0, 1), latency_ms=0.5)
        # link (1-0.02) x endpoints (1-0.05)^2, then x (1-0.02) for the hop
        assert path_reliability(path, topo) == pytest.approx(0.884450, abs=1e-6)
        assert path_reliability(path, topo, include_sat_hop=True) == pytest.approx(0.866761, abs=1e-6)


class TestReliabilityTables:
    def test_latency_table_is_shortest_path(self):
        topo = random_topology(9, seed=21, extra_edges=4)
        tables = build_reliability_tables(topo)
        assert np.allclose(tables.d, floyd_warshall_latency(topo), atol=1e-9)

    def test_row_index_maps(self):
        topo = random_topology(8, seed=2, extra_edges=3)
        tables = build_reliability_tables(topo)
        assert tables.gateway_ids == topo.gateway_candidates()
        assert tables.controller_ids == topo.controller_candidates()
        assert tables.gateway_row(tables.gateway_ids[0]) == 0

    def test_sat_and_terrestrial_rows_differ_by_hop_factor(self):
        topo = random_topology(8, seed=13, extra_edges=3)
        tables = build_reliability_tables(topo)
        factor = 1.0 - topo.sat_link_failure_prob
        assert np.allclose(tables.r_sat, factor * tables.r_ctl, atol=1e-15)

    def test_single_path_tables_use_the_shortest_path(self):
        topo = random_topology(7, seed=4, extra_edges=2)
        tables = build_reliability_tables(topo, k_paths=1)
        _, pred = all_pairs_shortest(topo)
        for row, k in enumerate(tables.controller_ids):
            for v in range(topo.n):
                nodes = reconstruct_path(pred, v, k)
                expected = path_survival(nodes, topo, with_sat_hop=False)
                assert tables.r_ctl[row, v] == pytest.approx(expected, abs=1e-12)

    def test_multi_path_tables_take_best_of_k(self):
        topo = random_topology(7, seed=8, extra_edges=3)
        tables = build_reliability_tables(topo, k_paths=3)
        for row, k in enumerate(tables.controller_ids):
            for v in range(topo.n):
                candidates = enumerate_simple_paths(topo, v, k)[:3]
                expected = max(path_survival(nodes, topo, False) for nodes, _ in candidates)
                assert tables.r_ctl[row, v] == pytest.approx(expected, abs=1e-12)

    def test_more_paths_never_hurt(self):
        topo = random_topology(9, seed=17, extra_edges=5)
        one = build_reliability_tables(topo, k_paths=1)
        three = build_reliability_tables(topo, k_paths=3)
        assert (three.r_ctl >= one.r_ctl - 1e-12).all()
        assert (three.r_sat >= one.r_sat - 1e-12).all()

    def test_values_are_probabilities(self):
        topo = random_topology(10, seed=33, extra_edges=4)
        tables = build_reliability_tables(topo, k_paths=2)
        assert (tables.r_sat > 0).all() and (tables.r_sat <= 1).all()
        assert (tables.r_ctl > 0).all() and (tables.r_ctl <= 1).all()
