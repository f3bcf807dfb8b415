import itertools
import math

import numpy as np
import pytest

from bopcrit.bop import (
    ALGORITHM,
    ENTROPY,
    EQUATION,
    BopProbabilities,
    CriticalityVector,
    bop_probabilities,
    bpc,
    bpcf,
    build_model,
    deleted_probabilities_exact,
    kl_divergence,
    path_sum_oracle,
    restricted_probabilities,
    sherman_deleted,
    transition_weights,
)
from bopcrit.graph import CostPolicy, Graph, delete_node, from_edge_list
from bopcrit.linalg import SingularMatrixError
from bopcrit.measures import rank_graph

from conftest import complete_graph, path_graph, random_connected, star_graph, toy_graph

THETAS = (1e-6, 1e-3, 1e-2, 1e-1, 1.0, 10.0)


def _walk_enumeration(g, theta, max_len):
    """Sum of walk weights by listing every walk explicitly."""
    n = g.n
    a = g.weights
    deg = a.sum(axis=1)
    total = np.eye(n)
    for length in range(1, max_len + 1):
        for walk in itertools.product(range(n), repeat=length + 1):
            w = 1.0
            for u, v in zip(walk, walk[1:]):
                if a[u, v] == 0:
                    break
                w *= a[u, v] / deg[u] * math.exp(-theta / a[u, v])
            else:
                total[walk[0], walk[-1]] += w
    return total


def _kl(p, q):
    p = p.ravel()
    q = q.ravel()
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _toy_bpc_from_path_sums(theta):
    g = toy_graph()
    z = path_sum_oracle(g, theta=theta, max_len=40)
    out = []
    for j in range(6):
        keep = [k for k in range(6) if k != j]
        r = z[np.ix_(keep, keep)]
        zd = path_sum_oracle(delete_node(g, j), theta=theta, max_len=40)
        out.append(_kl(zd / zd.sum(), r / r.sum()))
    return np.array(out)


def test_single_edge_closed_form():
    g = from_edge_list([(0, 1, 2.0)], 2)
    theta = 0.7
    w = math.exp(-theta * 0.5)
    expected = np.array([[1.0, w], [w, 1.0]]) / (1 - w * w)
    np.testing.assert_allclose(build_model(g, theta=theta).Z, expected, rtol=1e-13)


def test_oracle_matches_literal_walks():
    g = random_connected(4, 0.5, 2, weighted=True)
    np.testing.assert_allclose(path_sum_oracle(g, theta=0.8, max_len=4), _walk_enumeration(g, 0.8, 4), rtol=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_fundamental_matrix_matches_walk_sums(seed):
    g = random_connected(7, 0.3, seed, weighted=True)
    z = build_model(g, theta=1.0).Z
    np.testing.assert_allclose(z, path_sum_oracle(g, theta=1.0, max_len=40), atol=1e-9)


def test_oracle_guards():
    with pytest.raises(ValueError):
        path_sum_oracle(complete_graph(11))
    with pytest.raises(ValueError):
        path_sum_oracle(complete_graph(3), max_len=41)


def test_toy_scores_from_path_sums():
    for theta in (1.0, 10.0):
        np.testing.assert_allclose(bpc(toy_graph(), theta=theta).scores, _toy_bpc_from_path_sums(theta), rtol=1e-7, atol=1e-15)


def test_toy_ranking_every_theta():
    g = toy_graph()
    for theta in THETAS:
        s = bpc(g, theta=theta).scores
        assert int(np.argmax(s)) == 1 and np.sum(s == s.max()) == 1
        assert int(np.argmin(s)) == 2 and np.sum(s == s.min()) == 1
    order = [g.labels[i] for i in rank_graph(g, bpc(g, theta=1.0).scores).order]
    assert order == [2, 5, 6, 1, 4, 3]


def test_probabilities_normalised():
    m = build_model(toy_graph(), theta=0.5)
    assert bop_probabilities(m).probs.sum() == pytest.approx(1.0, abs=1e-12)
    r = restricted_probabilities(m, 2)
    assert r.support == (0, 1, 3, 4, 5)
    assert r.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert deleted_probabilities_exact(toy_graph(), theta=0.5, j=2).probs.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.1, 1.0, 10.0])
def test_sherman_matches_direct_inverse(theta):
    g = random_connected(25, 0.15, 7, weighted=True)
    m = build_model(g, theta=theta)
    for j in range(g.n):
        w = transition_weights(g, CostPolicy(), theta).copy()
        w[j, :] = 0.0
        direct = np.linalg.inv(np.eye(g.n) - w)
        direct[j, :] = 0.0
        direct[:, j] = 0.0
        assert np.abs(sherman_deleted(m, j) - direct).max() <= 1e-10


def test_sherman_row_and_column_are_exact_zeros():
    m = build_model(star_graph(4), theta=1.0)
    s = sherman_deleted(m, 0)
    assert np.all(s[0] == 0) and np.all(s[:, 0] == 0)
    # removing the hub leaves only the empty walks
    np.testing.assert_allclose(s[1:, 1:], np.eye(4), atol=1e-15)


def test_kl_examples():
    half = BopProbabilities((0, 1), np.array([[0.5, 0.0], [0.0, 0.5]]))
    point = BopProbabilities((0, 1), np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert kl_divergence(point, half) == pytest.approx(math.log(2))
    assert kl_divergence(half, half) == 0.0
    assert kl_divergence(half, point) == math.inf
    with pytest.raises(ValueError, match="supports"):
        kl_divergence(half, BopProbabilities((0, 2), half.probs))


def test_bpc_is_the_kl_of_the_exact_deletion():
    g = random_connected(12, 0.2, 3, weighted=True)
    m = build_model(g, theta=0.5)
    for direction in (ALGORITHM, EQUATION):
        got = bpc(g, theta=0.5, direction=direction).scores
        for j in range(g.n):
            r = restricted_probabilities(m, j)
            d = deleted_probabilities_exact(g, theta=0.5, j=j)
            want = kl_divergence(d, r) if direction == ALGORITHM else kl_divergence(r, d)
            assert got[j] == pytest.approx(want, rel=1e-9, abs=1e-15)


def test_bpcf_is_the_kl_of_the_rank_one_update():
    g = random_connected(15, 0.2, 5, weighted=True)
    m = build_model(g, theta=2.0)
    for direction in (ALGORITHM, EQUATION):
        got = bpcf(g, theta=2.0, direction=direction).scores
        for j in range(g.n):
            r = restricted_probabilities(m, j)
            keep = list(r.support)
            s = sherman_deleted(m, j)[np.ix_(keep, keep)]
            d = BopProbabilities(r.support, s / s.sum())
            want = kl_divergence(d, r) if direction == ALGORITHM else kl_divergence(r, d)
            assert got[j] == pytest.approx(want, rel=1e-8, abs=1e-13)


def test_cut_vertex_is_infinite_in_equation_direction():
    g = path_graph(3)
    for fn in (bpc, bpcf):
        s = fn(g, direction=EQUATION).scores
        assert s[1] == math.inf and np.isfinite(s[[0, 2]]).all()
        # the executable order only compares surviving walks and stays finite
        assert np.isfinite(fn(g).scores).all()


def test_disconnected_graph_and_singletons():
    g = from_edge_list([(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)], 6)
    z = build_model(g).Z
    assert np.all(z[:3, 3:] == 0) and z[5, 5] == 1.0
    for fn in (bpc, bpcf):
        s = fn(g).scores
        assert s[5] == pytest.approx(0.0, abs=1e-15)
        assert np.all(s >= -1e-12)


def test_entropy_variant():
    g = complete_graph(4)
    with pytest.raises(ValueError, match="diverges"):
        build_model(g, theta=1e-3, variant=ENTROPY)
    m = build_model(g, theta=3.0, variant=ENTROPY)
    np.testing.assert_allclose(m.Z, path_sum_oracle(g, theta=3.0, max_len=40, variant=ENTROPY), atol=1e-10)
    assert np.all(bpcf(g, theta=3.0, variant=ENTROPY).scores >= -1e-12)


def test_argument_checks():
    g = complete_graph(3)
    with pytest.raises(ValueError, match="theta"):
        bpc(g, theta=0.0)
    with pytest.raises(ValueError, match="variant"):
        bpcf(g, variant="other")
    with pytest.raises(ValueError, match="direction"):
        bpcf(g, direction="sideways")
    with pytest.raises(ValueError):
        bpc(Graph(np.zeros((1, 1))))
    with pytest.raises(ValueError, match="NaN"):
        CriticalityVector(np.array([np.nan]), 1.0, "standard", "bpc")


def test_singular_system_reports_theta():
    # exp(-theta c) rounds to 1, so W is the stochastic P and I - W is singular
    with pytest.raises(SingularMatrixError, match="theta=1e-300"):
        build_model(complete_graph(3), theta=1e-300)


def test_scores_are_deterministic():
    g = random_connected(20, 0.2, 9)
    a = bpcf(g, theta=0.1).scores
    b = bpcf(g, theta=0.1).scores
    assert a.tobytes() == b.tobytes()
