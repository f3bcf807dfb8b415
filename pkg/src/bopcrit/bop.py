"""Bag-of-paths (BoP) model and the BoP node criticality.

The BoP model puts a Gibbs-Boltzmann distribution on all walks of the
graph: a walk is drawn with probability proportional to its likelihood
under the natural random walk times ``exp(-theta * cost)``.  All the
quantities needed here follow from the fundamental matrix
``Z = (I - W)^-1`` with ``W = P_ref * exp(-theta C)`` (elementwise).

The criticality of node ``j`` is a Kullback-Leibler divergence between two
start/end distributions over the surviving nodes:

* the *restricted* distribution, computed on the intact graph but with
  ``j`` removed from the support (walks may still pass through ``j``);
* the *deleted* distribution, where walks through ``j`` are gone.

:func:`bpc` recomputes the deleted distribution from scratch for every
node (O(n^4)); :func:`bpcf` obtains it with one rank-one update of ``Z``
per node (O(n^3)), at the price of not renormalising the reference
transition probabilities of ``j``'s neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _components

from .graph import CostPolicy, Graph, cost_matrix, delete_node
from .linalg import SingularMatrixError, invert

STANDARD = "standard"
ENTROPY = "entropy"
VARIANTS = (STANDARD, ENTROPY)

# KL(deleted || restricted), the order used by the executable algorithm
ALGORITHM = "algorithm"
# KL(restricted || deleted)
EQUATION = "equation"
DIRECTIONS = (ALGORITHM, EQUATION)

UNDERFLOW = 1e-300
# Sherman-Morrison entries below this fraction of z_ik are cancellation noise
_CANCEL_RTOL = 64 * np.finfo(float).eps

ORACLE_MAX_NODES = 10
ORACLE_MAX_LEN = 40


@dataclass(frozen=True, eq=False)
class BopModel:
    theta: float
    variant: str
    W: np.ndarray
    Z: np.ndarray

    @property
    def n(self) -> int:
        return self.Z.shape[0]


@dataclass(frozen=True, eq=False)
class BopProbabilities:
    """Start/end probabilities ``probs[a, b]`` over ``support`` (node positions)."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        if self.probs.shape != (len(self.support), len(self.support)):
            raise ValueError("probability matrix does not match its support")


@dataclass(frozen=True)
class CriticalityVector:
    scores: np.ndarray
    theta: float
    variant: str
    method: str
    direction: str = ALGORITHM

    def __post_init__(self):
        if np.any(np.isnan(self.scores)):
            raise ValueError("criticality scores contain NaN")


def _check_args(theta, variant, direction=ALGORITHM):
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown KL direction {direction!r}; expected one of {DIRECTIONS}")


def _check_radius(w: np.ndarray, theta: float) -> None:
    radius = np.abs(np.linalg.eigvalsh(w)).max(initial=0.0)
    if radius >= 1.0:
        raise ValueError(f"walk series diverges for theta={theta}: spectral radius of W is {radius:.4g} >= 1")


def _killed_transitions(weights: np.ndarray, discount: np.ndarray, variant: str) -> np.ndarray:
    """``W`` from adjacency weights and ``exp(-theta C)``."""
    if variant == STANDARD:
        d = weights.sum(axis=1, keepdims=True)
        w = np.divide(weights, d, out=np.zeros_like(weights), where=d > 0)
        w *= discount
    else:
        w = discount.copy()
    w[w < UNDERFLOW] = 0.0
    return w


def _discount(g: Graph, policy: CostPolicy, theta: float) -> np.ndarray:
    with np.errstate(under="ignore"):
        return np.exp(-theta * cost_matrix(g, policy))


def _fundamental(w: np.ndarray, adjacency: np.ndarray, theta: float) -> np.ndarray:
    n = w.shape[0]
    try:
        z = invert(np.eye(n) - w)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"I - W is singular at theta={theta}", exc.rcond) from None
    # within a component every entry is positive, and elimination keeps
    # entries between components exactly zero, so the component search is
    # only needed when some entry vanishes
    if not (z > 0).all():
        ncomp, comp = _components(csr_matrix(adjacency), directed=False)
        if ncomp > 1:
            z[comp[:, None] != comp[None, :]] = 0.0
        np.maximum(z, 0.0, out=z)
    return z


def transition_weights(g: Graph, policy: CostPolicy, theta: float, variant: str = STANDARD) -> np.ndarray:
    """The killed transition matrix ``W``."""
    _check_args(theta, variant)
    return _killed_transitions(g.weights, _discount(g, policy, theta), variant)


def build_model(g: Graph, policy: CostPolicy = CostPolicy(), theta: float = 1.0, variant: str = STANDARD) -> BopModel:
    """Compute ``W`` and the fundamental matrix ``Z = (I - W)^-1``.

    Disconnected graphs are handled block-wise: ``Z`` is zero between
    different connected components, so each component carries its own
    walks and isolated nodes only hold their empty walk.
    """
    w = transition_weights(g, policy, theta, variant)
    if variant == ENTROPY:
        _check_radius(w, theta)
    z = _fundamental(w, g.adjacency, theta)
    w.setflags(write=False)
    z.setflags(write=False)
    return BopModel(float(theta), variant, w, z)


def path_sum_oracle(
    g: Graph,
    policy: CostPolicy = CostPolicy(),
    theta: float = 1.0,
    max_len: int = 30,
    variant: str = STANDARD,
) -> np.ndarray:
    """Brute-force walk sum: ``sum`` over walks of length <= ``max_len`` of
    likelihood times ``exp(-theta * cost)``, empty walks included.

    Walk weights are accumulated one step at a time with plain loops; no
    matrix inversion is involved.  Meant for small test graphs only.
    """
    _check_args(theta, variant)
    if g.n > ORACLE_MAX_NODES:
        raise ValueError(f"path-sum oracle limited to {ORACLE_MAX_NODES} nodes, got {g.n}")
    if not 0 <= max_len <= ORACLE_MAX_LEN:
        raise ValueError(f"max_len must be in [0, {ORACLE_MAX_LEN}]")
    n = g.n
    a = g.weights.tolist()
    cost = cost_matrix(g, policy).tolist()
    step = [[0.0] * n for _ in range(n)]
    for i in range(n):
        degree = sum(a[i])
        for k in range(n):
            if a[i][k] > 0:
                likelihood = a[i][k] / degree if variant == STANDARD else 1.0
                step[i][k] = likelihood * math.exp(-theta * cost[i][k])
    # walks[i][k]: total weight of walks i -> k with exactly `length` steps
    walks = [[float(i == k) for k in range(n)] for i in range(n)]
    total = [row[:] for row in walks]
    for _ in range(max_len):
        walks = [
            [sum(walks[i][m] * step[m][k] for m in range(n)) for k in range(n)]
            for i in range(n)
        ]
        for i in range(n):
            for k in range(n):
                total[i][k] += walks[i][k]
    return np.array(total)


def bop_probabilities(model: BopModel) -> BopProbabilities:
    z = model.Z
    return BopProbabilities(tuple(range(model.n)), z / z.sum())


def _others(n: int, j: int) -> np.ndarray:
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0 <= j < n:
        raise IndexError(f"node {j} out of range for n={n}")
    return np.delete(np.arange(n), j)


def restricted_probabilities(model: BopModel, j: int) -> BopProbabilities:
    """Intact-graph probabilities with ``j`` dropped as a start or end node."""
    keep = _others(model.n, j)
    sub = model.Z[np.ix_(keep, keep)]
    return BopProbabilities(tuple(keep.tolist()), sub / sub.sum())


def deleted_probabilities_exact(
    g: Graph,
    policy: CostPolicy = CostPolicy(),
    theta: float = 1.0,
    variant: str = STANDARD,
    j: int = 0,
) -> BopProbabilities:
    """Probabilities of the graph with ``j`` deleted, rebuilt from scratch."""
    keep = _others(g.n, j)
    z = build_model(delete_node(g, j), policy, theta, variant).Z
    return BopProbabilities(tuple(keep.tolist()), z / z.sum())


def sherman_deleted(model: BopModel, j: int) -> np.ndarray:
    """Fundamental matrix once row ``j`` of ``W`` is zeroed (``j`` absorbing).

    Sherman-Morrison reduces the update to
    ``z_ik - z_ij * z_jk / z_jj``; row and column ``j`` are returned as
    exact zeros.
    """
    _others(model.n, j)
    z = model.Z
    upd = z - np.outer(z[:, j], z[j, :] / z[j, j])
    upd[upd <= _CANCEL_RTOL * z] = 0.0
    upd[j, :] = 0.0
    upd[:, j] = 0.0
    return upd


def _kl_masses(p: np.ndarray, q: np.ndarray, p_total: float | None = None, q_total: float | None = None) -> float:
    """KL divergence between the normalisations of two non-negative arrays.

    Written as ``sum p log(p/q) / P + log(Q/P)`` so each term only needs the
    entrywise ratio; entries with ``p = 0`` contribute nothing.
    """
    p_total = p.sum() if p_total is None else p_total
    q_total = q.sum() if q_total is None else q_total
    pos = p > 0
    if np.any(pos & ~(q > 0)):
        return math.inf
    ratio = np.divide(p, q, out=np.ones_like(p), where=pos)
    # ratio is 1 wherever p vanishes, so those terms are exact zeros
    return float((p * np.log(ratio)).sum() / p_total + math.log(q_total / p_total))


def kl_divergence(p: BopProbabilities, q: BopProbabilities) -> float:
    """``sum p log(p/q)`` with ``0 log 0 = 0 log(0/0) = 0``; ``inf`` if ``q``
    vanishes where ``p`` does not."""
    if tuple(p.support) != tuple(q.support):
        raise ValueError("distributions are defined on different supports")
    return _kl_masses(np.asarray(p.probs, dtype=float), np.asarray(q.probs, dtype=float))


def bpc(
    g: Graph,
    policy: CostPolicy = CostPolicy(),
    theta: float = 1.0,
    variant: str = STANDARD,
    direction: str = ALGORITHM,
) -> CriticalityVector:
    """Exact BoP criticality: the deleted graph's model is rebuilt for every node.

    Equivalent to comparing :func:`restricted_probabilities` with
    :func:`deleted_probabilities_exact` for each ``j``, without re-validating
    a new :class:`Graph` each time.
    """
    _check_args(theta, variant, direction)
    if g.n < 2:
        raise ValueError("criticality needs at least two nodes")
    model = build_model(g, policy, theta, variant)
    discount = _discount(g, policy, theta)
    adjacency = g.adjacency
    scores = np.empty(g.n)
    for j in range(g.n):
        keep = np.delete(np.arange(g.n), j)
        sub = np.ix_(keep, keep)
        w = _killed_transitions(g.weights[sub], discount[sub], variant)
        try:
            deleted = _fundamental(w, adjacency[sub], theta)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"deleting node {j}: {exc}", exc.rcond) from None
        restricted = model.Z[sub]
        if direction == ALGORITHM:
            scores[j] = _kl_masses(deleted, restricted)
        else:
            scores[j] = _kl_masses(restricted, deleted)
    return CriticalityVector(scores, float(theta), variant, "bpc", direction)


# rows per block in bpcf, keeping the per-block temporaries cache sized
_BLOCK_ENTRIES = 32768


def _sherman_kl(z: np.ndarray, inv_z: np.ndarray, j: int, restricted_total: float, direction: str) -> float:
    """KL term of node ``j`` straight from the rank-one update, by row blocks.

    With ``x_ik = z_ij z_jk / (z_jj z_ik)`` the deleted mass is
    ``z_ik (1 - x_ik)`` and its log-ratio to the restricted mass is
    ``log1p(-x_ik)``, so the update matrix is never materialised.
    """
    n = z.shape[0]
    col = z[:, j] / z[j, j]
    row = z[j, :]
    block = max(1, _BLOCK_ENTRIES // n)
    deleted_total = 0.0
    acc = 0.0
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        zb = z[rows]
        x = np.multiply.outer(col[rows], row)
        x *= inv_z[rows]
        dead = x >= 1.0 - _CANCEL_RTOL
        dead[:, j] = True
        if start <= j < rows.stop:
            dead[j - start] = True
        x[dead] = 0.0
        if direction == ALGORITHM:
            kept = zb * (1.0 - x)
            kept[dead] = 0.0
            deleted_total += kept.sum()
            acc += (kept * np.log1p(-x)).sum()
        else:
            lost = dead & (zb > 0)
            lost[:, j] = False
            if start <= j < rows.stop:
                lost[j - start] = False
            if lost.any():
                return math.inf
            kept = zb * (1.0 - x)
            kept[dead] = 0.0
            deleted_total += kept.sum()
            restricted = zb.copy()
            restricted[:, j] = 0.0
            if start <= j < rows.stop:
                restricted[j - start] = 0.0
            acc -= (restricted * np.log1p(-x)).sum()
    if direction == ALGORITHM:
        return float(acc / deleted_total + math.log(restricted_total / deleted_total))
    return float(acc / restricted_total + math.log(deleted_total / restricted_total))


def bpcf(
    g: Graph,
    policy: CostPolicy = CostPolicy(),
    theta: float = 1.0,
    variant: str = STANDARD,
    direction: str = ALGORITHM,
) -> CriticalityVector:
    """Fast BoP criticality: one inversion, then a rank-one update per node.

    Scores agree with comparing :func:`sherman_deleted` against
    :func:`restricted_probabilities` node by node.
    """
    _check_args(theta, variant, direction)
    if g.n < 2:
        raise ValueError("criticality needs at least two nodes")
    z = build_model(g, policy, theta, variant).Z
    inv_z = np.divide(1.0, z, out=np.zeros_like(z), where=z > 0)
    total = z.sum()
    row_sums = z.sum(axis=1)
    col_sums = z.sum(axis=0)
    scores = np.empty(g.n)
    for j in range(g.n):
        restricted_total = total - row_sums[j] - col_sums[j] + z[j, j]
        scores[j] = _sherman_kl(z, inv_z, j, restricted_total, direction)
    return CriticalityVector(scores, float(theta), variant, "bpcf", direction)
