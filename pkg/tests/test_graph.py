import numpy as np
import pytest

from bopcrit.graph import (
    CostPolicy,
    Graph,
    connected_components,
    cost_matrix,
    delete_node,
    from_edge_list,
    h_neighborhood,
    hop_distances,
    laplacian,
    read_edge_list,
    transition_matrix,
    write_edge_list,
)

from conftest import complete_graph, path_graph, random_connected, star_graph, toy_graph


def test_rejects_bad_adjacency():
    with pytest.raises(ValueError, match="symmetric"):
        Graph([[0, 1], [0, 0]])
    with pytest.raises(ValueError, match="non-negative"):
        Graph([[0, -1], [-1, 0]])
    with pytest.raises(ValueError, match="diagonal"):
        Graph([[1, 0], [0, 0]])
    with pytest.raises(ValueError, match="finite"):
        Graph([[0, np.nan], [np.nan, 0]])
    with pytest.raises(ValueError, match="unique"):
        Graph(np.zeros((2, 2)), ["a", "a"])


def test_weights_are_read_only():
    g = complete_graph(3)
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0


def test_edge_list_validation():
    with pytest.raises(ValueError, match="self-loop"):
        from_edge_list([(1, 1, 1.0)], 3)
    with pytest.raises(ValueError, match="out of range"):
        from_edge_list([(0, 3, 1.0)], 3)
    with pytest.raises(ValueError, match="non-positive"):
        from_edge_list([(0, 1, 0.0)], 3)


def test_toy_graph_shape():
    g = toy_graph()
    assert g.n == 6 and g.edge_count() == 7
    assert g.neighbor_counts().tolist() == [2, 4, 1, 2, 3, 2]


def test_transition_rows_and_isolated_nodes():
    g = from_edge_list([(0, 1, 2.0), (1, 2, 1.0)], 4)
    p = transition_matrix(g)
    np.testing.assert_allclose(p.sum(axis=1), [1, 1, 1, 0])
    assert p[1, 0] == pytest.approx(2 / 3)


def test_laplacian_row_sums():
    g = random_connected(12, 0.3, 1, weighted=True)
    np.testing.assert_allclose(laplacian(g).sum(axis=1), 0.0, atol=1e-12)


def test_cost_policies():
    g = from_edge_list([(0, 1, 2.0), (1, 2, 0.5)], 3)
    c = cost_matrix(g, CostPolicy.reciprocal())
    assert c[0, 1] == 0.5 and c[1, 2] == 2.0
    assert np.isinf(c[0, 2]) and np.isinf(c[0, 0])
    assert cost_matrix(g, CostPolicy.unit())[1, 2] == 1.0
    explicit = CostPolicy.explicit(np.array([[0, 3, 9], [3, 0, 4], [9, 4, 0]]))
    assert cost_matrix(g, explicit)[1, 2] == 4.0
    with pytest.raises(ValueError, match="positive"):
        cost_matrix(g, CostPolicy.explicit(np.zeros((3, 3))))


def test_explicit_costs_follow_labels_after_deletion():
    g = path_graph(4)
    m = np.arange(16, dtype=float).reshape(4, 4) + 1
    m = m + m.T
    h = delete_node(g, 0)
    assert cost_matrix(h, CostPolicy.explicit(m))[0, 1] == m[1, 2]


def test_components_ordered_by_size():
    g = from_edge_list([(0, 1, 1.0), (3, 4, 1.0), (4, 5, 1.0)], 7)
    comps = connected_components(g)
    assert comps.sizes == (3, 2, 1, 1)
    assert comps.members(0).tolist() == [3, 4, 5]
    assert comps.largest == 3


def test_delete_node_keeps_labels():
    g = toy_graph()
    h = delete_node(g, 1)
    assert h.labels == (1, 3, 4, 5, 6)
    assert h.edge_count() == 3
    with pytest.raises(ValueError):
        delete_node(Graph(np.zeros((1, 1))), 0)


def test_hop_distances_and_neighbourhood():
    g = path_graph(5)
    assert hop_distances(g, 0).tolist() == [0, 1, 2, 3, 4]
    nb = h_neighborhood(g, 2, 1)
    assert nb.labels == (2, 1, 3)
    assert h_neighborhood(star_graph(4), 1, 2).n == 5


def test_edge_list_round_trip(tmp_path):
    g = random_connected(9, 0.3, 4, weighted=True)
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    h = read_edge_list(path)
    np.testing.assert_array_equal(g.weights, h.weights)


def test_edge_list_labels_header(tmp_path):
    path = tmp_path / "toy.edges"
    write_edge_list(toy_graph(), path)
    assert "labels=1,2,3,4,5,6" in path.read_text()
    h = read_edge_list(path)
    assert h.labels == ("1", "2", "3", "4", "5", "6")


def test_edge_list_parsing(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# comment\nn=4\n0 1\n1 2 2.5  # heavy\n")
    g = read_edge_list(path)
    assert g.n == 4 and g.weights[1, 2] == 2.5 and g.weights[0, 1] == 1.0
    path.write_text("0 1 2 3\n")
    with pytest.raises(ValueError, match="expected"):
        read_edge_list(path)
