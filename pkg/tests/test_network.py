import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conndecode import network
from conndecode.network import DynamicConfig, Graph


def binary(adj):
    return Graph(np.asarray(adj, dtype=float), "binary", ("test", 0.0))


TRIANGLE = binary([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
PATH = binary([[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def floyd_warshall(adj):
    n = len(adj)
    d = np.where(np.asarray(adj) > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i, k] + d[k, j] < d[i, j]:
                    d[i, j] = d[i, k] + d[k, j]
    return d


def random_binary_graph(rng, n, p):
    a = np.triu((rng.random((n, n)) < p).astype(float), 1)
    return binary(a + a.T)


def test_proportional_edge_count(rng):
    m = rng.random((10, 10))
    m = (m + m.T) / 2
    g = network.threshold_matrix(m, "proportional", 0.2)
    assert g.n_edges == 9


def test_absolute_threshold():
    m = np.array([[1, 0.4, 0.6], [0.4, 1, 0.6], [0.6, 0.6, 1]])
    g = network.threshold_matrix(m, "absolute", 0.5)
    assert g.adjacency[0, 1] == 0
    assert g.adjacency[0, 2] == 1 and g.adjacency[1, 2] == 1


def test_negative_edges_removed():
    m = np.array([[1, -0.3, 0.2], [-0.3, 1, 0.5], [0.2, 0.5, 1]])
    g = network.threshold_matrix(m, "absolute", 0.1, binarize=False)
    assert g.adjacency[0, 1] == 0
    assert g.negative_edges_removed == 1
    assert g.adjacency[1, 2] == 0.5
    assert (g.adjacency >= 0).all()


def test_proportional_ties_drop_larger_index():
    m = np.full((4, 4), 0.5)
    np.fill_diagonal(m, 1)
    g = network.threshold_matrix(m, "proportional", 0.5)  # keep 3 of 6 equal edges
    kept = [(i, j) for i, j in itertools.combinations(range(4), 2) if g.adjacency[i, j]]
    assert kept == [(0, 1), (0, 2), (0, 3)]


def test_threshold_errors():
    with pytest.raises(ValueError):
        network.threshold_matrix(np.eye(3), "proportional", 1.5)
    with pytest.raises(ValueError):
        network.threshold_matrix(np.eye(3), "proportional", 0.0)
    m = np.eye(3)
    m[0, 1] = np.nan
    with pytest.raises(ValueError, match="NaN"):
        network.threshold_matrix(m, "absolute", 0.1)


def test_graph_invariants(rng):
    m = rng.standard_normal((8, 8))
    m = (m + m.T) / 2
    for binarize in (True, False):
        g = network.threshold_matrix(m, "proportional", 0.4, binarize)
        a = g.adjacency
        assert np.array_equal(a, a.T)
        assert np.all(np.diag(a) == 0)
        assert (a >= 0).all()
        if binarize:
            assert set(np.unique(a)) <= {0.0, 1.0}


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 9), st.integers(0, 10**6),
       st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_proportional_monotone(n, seed, v1, v2):
    v1, v2 = sorted((v1, v2))
    r = np.random.default_rng(seed)
    m = r.random((n, n))  # continuous draws: tie-free
    m = (m + m.T) / 2
    a1 = network.threshold_matrix(m, "proportional", v1).adjacency
    a2 = network.threshold_matrix(m, "proportional", v2).adjacency
    assert np.all(a1 <= a2)


def test_sliding_window_count(rng):
    ts = rng.standard_normal((100, 4))
    assert len(network.sliding_windows(ts, DynamicConfig(20, 10))) == 9


def test_single_window_equals_full_correlation(rng):
    ts = rng.standard_normal((20, 4))
    (w,) = network.sliding_windows(ts, DynamicConfig(20, 5))
    np.testing.assert_allclose(w, np.corrcoef(ts, rowvar=False), atol=1e-14)


def test_identical_nodes_correlate_fully(rng):
    x = rng.standard_normal(50)
    ts = np.column_stack([x, x, rng.standard_normal(50)])
    for w in network.sliding_windows(ts, DynamicConfig(10, 5)):
        assert w[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_constant_node_in_window_names_it(rng):
    ts = rng.standard_normal((30, 3))
    ts[10:20, 2] = 4.0
    with pytest.raises(ValueError, match="subject s9, window 1: node 2"):
        network.sliding_windows(ts, DynamicConfig(10, 10), subject="s9")


def test_window_config_validation():
    with pytest.raises(ValueError):
        DynamicConfig(1)
    with pytest.raises(ValueError):
        DynamicConfig(5, 0)
    with pytest.raises(ValueError, match="exceeds"):
        network.sliding_windows(np.zeros((5, 2)), DynamicConfig(6))


def test_summaries():
    a, b = np.array([[0.2]]), np.array([[0.4]])
    assert network.summarize_dynamic([a, b], "mean")[0, 0] == pytest.approx(0.3)
    np.testing.assert_array_equal(network.summarize_dynamic([a, a, a], "std"), [[0.0]])
    np.testing.assert_array_equal(network.summarize_dynamic([a], "mean"), a)
    with pytest.raises(ValueError):
        network.summarize_dynamic([a], "std")


def test_mean_of_identical_windows_is_exact(rng):
    m = rng.standard_normal((5, 5)) / 3
    assert np.array_equal(network.summarize_dynamic([m] * 7, "mean"), m)


def test_path_lengths_hand_cases():
    d = network.shortest_path_lengths(TRIANGLE)
    assert np.all(d[~np.eye(3, dtype=bool)] == 1)
    assert network.shortest_path_lengths(PATH)[0, 2] == 2
    d = network.shortest_path_lengths(binary(np.zeros((2, 2))))
    assert d[0, 1] == np.inf


def test_path_lengths_need_binary():
    with pytest.raises(ValueError):
        network.shortest_path_lengths(Graph(np.zeros((2, 2)), "weighted", ("x", 0)))


def test_bfs_matches_floyd_warshall(rng):
    for _ in range(100):
        g = random_binary_graph(rng, int(rng.integers(2, 13)), rng.random())
        np.testing.assert_array_equal(network.shortest_path_lengths(g),
                                      floyd_warshall(g.adjacency))


def test_measures_hand_values():
    tri = network.graph_measures(TRIANGLE, network.MEASURES)
    np.testing.assert_array_equal(tri["clustering"], [1, 1, 1])
    assert tri["char_path_length"] == 1.0
    assert tri["global_efficiency"] == 1.0
    path = network.graph_measures(PATH, network.MEASURES)
    assert path["clustering"][1] == 0
    # pairs: (a,b)=1, (b,c)=1, (a,c)=2 -> mean 4/3; efficiency (1+1+1/2)/3 = 5/6
    assert path["char_path_length"] == pytest.approx(4 / 3, abs=1e-15)
    assert path["global_efficiency"] == pytest.approx(5 / 6, abs=1e-15)
    np.testing.assert_array_equal(path["degree"], [1, 2, 1])


def test_measure_ranges(rng):
    for _ in range(50):
        g = random_binary_graph(rng, 9, rng.random())
        res = network.graph_measures(g, network.MEASURES)
        assert 0 <= res["global_efficiency"] <= 1
        assert np.all((res["clustering"] >= 0) & (res["clustering"] <= 1))
        np.testing.assert_array_equal(res["degree"], res["strength"])


def test_disconnected_pairs_reported():
    g = binary([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    res = network.graph_measures(g, {"char_path_length"})
    assert res["disconnected_pairs"] == 4
    assert res["char_path_length"] == 1.0


def test_measure_selection_errors():
    with pytest.raises(ValueError, match="empty"):
        network.graph_measures(TRIANGLE, set())
    with pytest.raises(ValueError, match="binary"):
        network.graph_measures(Graph(np.zeros((3, 3)), "weighted", ("x", 0)), {"clustering"})
    strength = network.graph_measures(Graph(np.array([[0, .5], [.5, 0]]), "weighted", ("x", 0)),
                                      {"strength"})
    np.testing.assert_array_equal(strength["strength"], [.5, .5])


def test_dynamic_connectivity(rng):
    from conndecode.ingest import TimeSeriesSet
    ts = TimeSeriesSet(("a", "b"), ("x", "y", "z"),
                       tuple(rng.standard_normal((40, 3)) for _ in range(2)))
    ds = network.dynamic_connectivity(ts, DynamicConfig(20, 10, "mean"))
    assert ds.subjects == ("a", "b") and ds.matrices[0].shape == (3, 3)
    expected = np.mean(network.sliding_windows(ts.series[0], DynamicConfig(20, 10)), axis=0)
    np.testing.assert_allclose(ds.matrices[0], expected, atol=1e-15)
