import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netclust.graphs import (BlockmodelGraphon, EdgeListError, Graph, MixtureModel,
                             SmoothGraphon, expected_edge_count, largest_connected_component,
                             latent_positions, load_edge_list, read_manifest, sample_graphon,
                             sample_mixture, save_edge_list, write_manifest)

from conftest import complete, random_graph


def write(tmp_path, text, name="g.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestGraph:
    def test_canonical_storage(self):
        g = Graph.from_edges(4, [(2, 1), (1, 2), (0, 3), (3, 3)])
        assert g.n == 4
        assert g.edges.tolist() == [[0, 3], [1, 2]]

    def test_invalid_edges_rejected(self):
        with pytest.raises(ValueError):
            Graph(3, [[1, 0]])
        with pytest.raises(ValueError):
            Graph(3, [[0, 3]])
        with pytest.raises(ValueError):
            Graph(3, [[0, 2], [0, 1]])

    def test_edges_read_only(self):
        g = complete(3)
        with pytest.raises(ValueError):
            g.edges[0, 0] = 1

    def test_adjacency_symmetric_no_loops(self, rng):
        g = random_graph(rng, 12)
        A = g.to_dense()
        assert np.array_equal(A, A.T)
        assert np.all(np.diag(A) == 0)
        assert A.sum() == 2 * g.num_edges
        assert np.array_equal(g.degrees, A.sum(axis=1))

    def test_from_adjacency_roundtrip(self, rng):
        g = random_graph(rng, 9)
        assert Graph.from_adjacency(g.to_dense()) == g

    def test_permute_and_subgraph(self):
        g = Graph.from_edges(3, [(0, 1)])
        h = g.permute([2, 0, 1])
        assert h.edges.tolist() == [[0, 2]]
        s = complete(4).subgraph([1, 3])
        assert s.n == 2 and s.num_edges == 1

    def test_equality_and_hash(self):
        assert complete(4) == complete(4)
        assert hash(complete(4)) == hash(complete(4))
        assert complete(4) != complete(5)


class TestEdgeList:
    def test_simple(self, tmp_path):
        g = load_edge_list(write(tmp_path, "0 1\n1 2"))
        assert g.n == 3 and g.edges.tolist() == [[0, 1], [1, 2]]

    def test_self_loop_dropped_and_counted(self, tmp_path):
        g, stats = load_edge_list(write(tmp_path, "0 0\n0 1"), with_stats=True)
        assert g.n == 2 and g.edges.tolist() == [[0, 1]]
        assert stats.self_loops == 1 and stats.duplicates == 0

    def test_duplicates_counted(self, tmp_path):
        g, stats = load_edge_list(write(tmp_path, "0 1\n1 0\n0 1\n"), with_stats=True)
        assert g.num_edges == 1 and stats.duplicates == 2

    def test_string_ids_compacted(self, tmp_path):
        g = load_edge_list(write(tmp_path, "a b\nb c"))
        assert g.n == 3
        assert g.node_ids == ("a", "b", "c")

    def test_sparse_integer_ids_compacted(self, tmp_path):
        g = load_edge_list(write(tmp_path, "# SNAP style header\n10 20\n20 5\n"))
        assert g.n == 3
        assert g.node_ids == (5, 10, 20)
        assert g.edges.tolist() == [[0, 2], [1, 2]]

    def test_bad_line_reports_line_number(self, tmp_path):
        with pytest.raises(EdgeListError, match=":2:"):
            load_edge_list(write(tmp_path, "0 1\n7\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(EdgeListError):
            load_edge_list(write(tmp_path, "# only a comment\n"))

    def test_roundtrip_keeps_isolated_nodes(self, tmp_path, rng):
        for n in (1, 5, 17):
            g = random_graph(rng, n, 0.2)
            p = tmp_path / f"g{n}.txt"
            save_edge_list(g, p)
            assert load_edge_list(p) == g

    def test_saved_edges_sorted(self, tmp_path):
        p = tmp_path / "g.txt"
        save_edge_list(Graph.from_edges(4, [(3, 2), (0, 1), (1, 3)]), p)
        assert p.read_text().splitlines()[1:] == ["0 1", "1 3", "2 3"]

    def test_manifest_roundtrip(self, tmp_path):
        write_manifest(tmp_path / "m.csv", [("a.txt", 1), ("sub/b.txt", 2)])
        rows = read_manifest(tmp_path / "m.csv")
        assert rows == [(str(tmp_path / "a.txt"), 1), (str(tmp_path / "sub/b.txt"), 2)]

    def test_manifest_missing_labels(self, tmp_path):
        write_manifest(tmp_path / "m.csv", [("a.txt", None)])
        assert read_manifest(tmp_path / "m.csv")[0][1] is None


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=40))
def test_save_load_identity(tmp_path_factory, n, pairs):
    pairs = [(a % n, b % n) for a, b in pairs]
    g = Graph.from_edges(n, pairs)
    p = tmp_path_factory.mktemp("rt") / "g.txt"
    save_edge_list(g, p)
    assert load_edge_list(p) == g


class TestLargestComponent:
    def test_connected_is_itself(self):
        assert largest_connected_component(complete(5)) == complete(5)

    def test_triangle_plus_isolated(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)])
        assert largest_connected_component(g) == complete(3)

    def test_sizes_four_and_three(self):
        g = Graph.from_edges(7, [(0, 1), (1, 2), (4, 5), (5, 6), (6, 3)])
        lcc = largest_connected_component(g)
        assert lcc.n == 4 and lcc.num_edges == 3

    def test_tie_goes_to_smallest_node(self):
        g = Graph.from_edges(5, [(3, 4), (1, 2)], node_ids="abcde")
        assert largest_connected_component(g).node_ids == ("b", "c")


class TestGraphons:
    def test_validation(self):
        with pytest.raises(ValueError):
            BlockmodelGraphon([[0.5, 0.2], [0.3, 0.5]])
        with pytest.raises(ValueError):
            BlockmodelGraphon([[1.5]])
        with pytest.raises(ValueError):
            BlockmodelGraphon([[0.5]], pi=[0.5, 0.5])
        with pytest.raises(ValueError):
            BlockmodelGraphon([[0.5]], rho=0)
        with pytest.raises(ValueError):
            SmoothGraphon("constant", {"c": 2.0})
        with pytest.raises(ValueError):
            MixtureModel([BlockmodelGraphon([[0.5]])], [0.7])

    def test_zero_graphon_gives_empty_graph(self):
        g = sample_graphon(SmoothGraphon("constant", {"c": 0.0}), 10, seed=3)
        assert g.n == 10 and g.num_edges == 0

    def test_one_graphon_gives_complete_graph(self):
        assert sample_graphon(SmoothGraphon("constant"), 5, seed=3) == complete(5)

    def test_grid_graphon_matches_blockmodel(self):
        B = [[0.6, 0.1], [0.1, 0.3]]
        a = sample_graphon(BlockmodelGraphon(B), 60, seed=4)
        b = sample_graphon(SmoothGraphon(grid=B), 60, seed=4)
        assert a == b

    def test_sampling_deterministic(self):
        gr = BlockmodelGraphon.planted_partition(0.3, 0.1, 3)
        assert sample_graphon(gr, 300, seed=9, graph_index=2) == \
            sample_graphon(gr, 300, seed=9, graph_index=2)
        assert sample_graphon(gr, 300, seed=9, graph_index=2) != \
            sample_graphon(gr, 300, seed=9, graph_index=3)

    def test_realized_p_valid(self):
        for gr in (BlockmodelGraphon.planted_partition(0.1, 0.05, 2, 0.6),
                   SmoothGraphon("logistic-distance", rho=0.5)):
            _, P = sample_graphon(gr, 80, seed=1, return_p=True)
            assert np.array_equal(P, P.T)
            assert P.min() >= 0 and P.max() <= 1 and np.all(np.diag(P) == 0)

    def test_edges_follow_realized_p(self):
        # edges only where P > 0 and always where P = 1
        gr = BlockmodelGraphon([[1.0, 0.0], [0.0, 1.0]])
        g, P = sample_graphon(gr, 40, seed=2, return_p=True)
        assert np.array_equal(g.to_dense(), P)

    def test_edge_density_within_three_std(self):
        gr = BlockmodelGraphon.planted_partition(0.1, 0.05, 2, 0.6)
        n = 500
        counts, means, variances = [], [], []
        for r in range(100):
            g, P = sample_graphon(gr, n, seed=7, graph_index=r, return_p=True)
            mu, var = expected_edge_count(P)
            counts.append(g.num_edges)
            means.append(mu)
            variances.append(var)
        # averaged edge count vs averaged exact mean of the realized P
        diff = np.mean(counts) - np.mean(means)
        sd = np.sqrt(np.sum(variances)) / len(counts)
        assert abs(diff) <= 3 * sd

    def test_edge_count_concentration_fixed_p(self):
        gr = BlockmodelGraphon.planted_partition(0.3, 0.1, 2)
        xi = latent_positions(120, 0, 99)
        counts = []
        for r in range(100):
            g, P = sample_graphon(gr, 120, seed=5, graph_index=r, latent=xi, return_p=True)
            counts.append(g.num_edges)
        mu, var = expected_edge_count(P)
        assert abs(np.mean(counts) - mu) <= 4 * np.sqrt(var / len(counts))
        assert all(abs(c - mu) <= 4 * np.sqrt(var) * 1.5 for c in counts)

    def test_calibrated_degree(self):
        gr = BlockmodelGraphon.planted_partition(0.6, 0.2, 2).calibrated(150, 22)
        assert gr.expected_degree(150) == pytest.approx(22)
        with pytest.raises(ValueError):
            BlockmodelGraphon([[0.01]]).calibrated(10, 50)

    def test_blockmodel_mean_f(self):
        gr = BlockmodelGraphon([[0.6, 0.2], [0.2, 0.4]], pi=[0.25, 0.75])
        assert gr.mean_f() == pytest.approx(0.0625 * 0.6 + 2 * 0.1875 * 0.2 + 0.5625 * 0.4)


class TestMixture:
    def test_single_component_labels(self):
        out = sample_mixture(MixtureModel([BlockmodelGraphon([[0.3]])]), 6, 20, seed=1)
        assert [lab for _, lab in out] == [1] * 6

    def test_degenerate_weights(self):
        m = MixtureModel([BlockmodelGraphon([[0.3]]), BlockmodelGraphon([[0.6]])], [1.0, 0.0])
        assert {lab for _, lab in sample_mixture(m, 15, 20, seed=2)} == {1}

    def test_fixed_counts(self):
        m = MixtureModel([BlockmodelGraphon([[0.3]]), BlockmodelGraphon([[0.6]])])
        out = sample_mixture(m, 20, 30, seed=0, counts=[13, 7])
        labels = [lab for _, lab in out]
        assert labels == [1] * 13 + [2] * 7
        with pytest.raises(ValueError):
            sample_mixture(m, 20, 30, counts=[10, 7])

    def test_shared_latent_gives_common_p(self):
        m = MixtureModel([BlockmodelGraphon.planted_partition(0.5, 0.1, 2),
                          BlockmodelGraphon.planted_partition(0.5, 0.2, 2)])
        out = sample_mixture(m, 4, 30, seed=3, counts=[2, 2], return_p=True)
        assert np.array_equal(out[0][2], out[1][2])
        assert not np.array_equal(out[0][2], out[2][2])

    def test_order_independent(self):
        m = MixtureModel([BlockmodelGraphon([[0.3]]), BlockmodelGraphon([[0.6]])])
        out = sample_mixture(m, 6, 25, seed=8, counts=[3, 3], shared_latent=False)
        assert out[4][0] == sample_graphon(m.components[1], 25, 8, graph_index=4)
