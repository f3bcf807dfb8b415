import math

import numpy as np
import pytest

from bopcrit.graph import laplacian
from bopcrit.linalg import (
    DisconnectedGraphError,
    SingularMatrixError,
    algebraic_connectivity,
    dominant_eigenvalue,
    expm_diag,
    invert,
    laplacian_pseudoinverse,
    sym_eigen,
)

from conftest import complete_graph, cycle_graph, path_graph, random_connected


def _expm_taylor(a, terms=60):
    # plain power series, independent of any eigen-solver
    out = np.eye(len(a))
    term = np.eye(len(a))
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def test_invert_matches_identity():
    rng = np.random.default_rng(0)
    m = np.eye(20) * 5 + rng.random((20, 20))
    inv = invert(m)
    np.testing.assert_allclose(m @ inv, np.eye(20), atol=1e-12)
    assert inv.flags["C_CONTIGUOUS"]


def test_invert_refuses_singular():
    with pytest.raises(SingularMatrixError) as err:
        invert(np.ones((3, 3)))
    assert err.value.rcond < 1e-13
    with pytest.raises(SingularMatrixError):
        invert(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]))
    with pytest.raises(ValueError):
        invert(np.ones((2, 3)))


def test_eigen_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        sym_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_algebraic_connectivity_known_values():
    assert algebraic_connectivity(laplacian(complete_graph(3))) == pytest.approx(3.0)
    # path P_n: 2 - 2 cos(pi / n)
    assert algebraic_connectivity(laplacian(path_graph(5))) == pytest.approx(2 - 2 * math.cos(math.pi / 5))
    # cycle C_n: 2 - 2 cos(2 pi / n)
    assert algebraic_connectivity(laplacian(cycle_graph(7))) == pytest.approx(2 - 2 * math.cos(2 * math.pi / 7))
    assert algebraic_connectivity(np.zeros((1, 1))) == 0.0


def test_k3_pseudoinverse():
    # L(K3) = 3I - J, so L+ = (I - J/3) / 3
    expected = (np.eye(3) - np.ones((3, 3)) / 3) / 3
    np.testing.assert_allclose(laplacian_pseudoinverse(laplacian(complete_graph(3))), expected, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_moore_penrose_conditions(seed):
    lap = laplacian(random_connected(15, 0.2, seed, weighted=True))
    x = laplacian_pseudoinverse(lap)
    np.testing.assert_allclose(lap @ x @ lap, lap, atol=1e-8)
    np.testing.assert_allclose(x @ lap @ x, x, atol=1e-8)
    np.testing.assert_allclose((lap @ x).T, lap @ x, atol=1e-8)
    np.testing.assert_allclose((x @ lap).T, x @ lap, atol=1e-8)


def test_pseudoinverse_rejects_disconnected():
    lap = np.zeros((4, 4))
    lap[:2, :2] = laplacian(path_graph(2))
    lap[2:, 2:] = laplacian(path_graph(2))
    with pytest.raises(DisconnectedGraphError):
        laplacian_pseudoinverse(lap)


def test_expm_diag_against_taylor():
    a = random_connected(8, 0.4, 3, weighted=True).weights
    np.testing.assert_allclose(expm_diag(a), np.diag(_expm_taylor(a)), rtol=1e-10)


def test_expm_diag_k3_and_edgeless():
    # diag expm(K3) = (e^2 + 2 e^-1) / 3
    np.testing.assert_allclose(expm_diag(complete_graph(3).weights), (math.e**2 + 2 / math.e) / 3)
    # the rounded figure 2.7085 is quoted with a slack of a few 1e-4
    assert expm_diag(complete_graph(3).weights)[0] == pytest.approx(2.7085, abs=5e-4)
    np.testing.assert_allclose(expm_diag(np.zeros((4, 4))), 1.0)


def test_dominant_eigenvalue():
    assert dominant_eigenvalue(complete_graph(5).weights) == pytest.approx(4.0)
    assert dominant_eigenvalue(cycle_graph(6).weights) == pytest.approx(2.0)
