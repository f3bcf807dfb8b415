"""Weighted undirected graphs stored as dense adjacency matrices.

Graphs are immutable; every structural change (node deletion, induced
neighbourhoods) returns a new :class:`Graph` whose ``labels`` keep track of
the original node identifiers.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse.csgraph import connected_components as _cc


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with non-negative symmetric affinities.

    Parameters
    ----------
    weights : (n, n) array_like
        Adjacency matrix ``A``; ``a_ij > 0`` means an edge of that affinity.
    labels : sequence of hashable, optional
        Original node identifiers, ``range(n)`` by default.
    """

    weights: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        a = np.array(self.weights, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("adjacency entries must be finite")
        if np.any(a < 0):
            raise ValueError("adjacency entries must be non-negative")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "weights", a)

        labels = tuple(range(a.shape[0])) if self.labels is None else tuple(self.labels)
        if len(labels) != a.shape[0]:
            raise ValueError(f"expected {a.shape[0]} labels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        """Boolean edge indicator."""
        return self.weights > 0

    def degrees(self) -> np.ndarray:
        """Weighted degrees ``A e``."""
        return self.weights.sum(axis=1)

    def neighbor_counts(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights)))

    def index_of(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no node labelled {label!r}") from None

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph on the given node positions (order preserved)."""
        idx = np.asarray(nodes, dtype=int)
        return Graph(self.weights[np.ix_(idx, idx)], [self.labels[i] for i in idx])

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count()})"


def from_edge_list(edges: Iterable[tuple[int, int, float]], n: int, symmetrize: bool = True) -> Graph:
    """Build a graph from ``(i, j, weight)`` triples over nodes ``0..n-1``.

    Duplicate edges keep the last weight. With ``symmetrize=False`` the edge
    list must already contain both orientations of every edge.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    a = np.zeros((n, n))
    for i, j, w in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        if not w > 0:
            raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
        a[i, j] = w
        if symmetrize:
            a[j, i] = w
    return Graph(a)


@dataclass(frozen=True)
class CostPolicy:
    """How transition costs are derived from the affinities.

    ``reciprocal`` uses ``c_ij = 1 / a_ij`` (edges as conductances), ``unit``
    uses ``c_ij = 1`` on every edge and ``explicit`` looks costs up in a
    user matrix indexed by node label.
    """

    kind: str = "reciprocal"
    matrix: np.ndarray | None = field(default=None, compare=False)
    matrix_labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("reciprocal", "unit", "explicit"):
            raise ValueError(f"unknown cost policy {self.kind!r}")
        if self.kind == "explicit" and self.matrix is None:
            raise ValueError("explicit cost policy needs a matrix")

    @classmethod
    def reciprocal(cls) -> "CostPolicy":
        return cls("reciprocal")

    @classmethod
    def unit(cls) -> "CostPolicy":
        return cls("unit")

    @classmethod
    def explicit(cls, matrix, labels: Sequence[Hashable] | None = None) -> "CostPolicy":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("explicit cost matrix must be square")
        labels = tuple(range(m.shape[0])) if labels is None else tuple(labels)
        return cls("explicit", m, labels)


def cost_matrix(g: Graph, policy: CostPolicy = CostPolicy()) -> np.ndarray:
    """Transition costs, ``inf`` wherever there is no edge (diagonal included)."""
    edges = g.adjacency
    c = np.full((g.n, g.n), np.inf)
    if policy.kind == "reciprocal":
        c[edges] = 1.0 / g.weights[edges]
    elif policy.kind == "unit":
        c[edges] = 1.0
    else:
        pos = {lab: i for i, lab in enumerate(policy.matrix_labels)}
        try:
            idx = np.array([pos[lab] for lab in g.labels])
        except KeyError as exc:
            raise ValueError(f"explicit cost matrix has no entry for node {exc.args[0]!r}") from None
        sub = policy.matrix[np.ix_(idx, idx)]
        if np.any(~(sub[edges] > 0)):
            raise ValueError("explicit costs must be positive on every edge")
        c[edges] = sub[edges]
    return c


def transition_matrix(g: Graph) -> np.ndarray:
    """Natural random walk ``P = D^-1 A``; isolated nodes get an all-zero row."""
    d = g.degrees()
    p = np.zeros_like(g.weights)
    nz = d > 0
    p[nz] = g.weights[nz] / d[nz, None]
    return p


def laplacian(g: Graph) -> np.ndarray:
    """``L = D - A``."""
    lap = -g.weights.copy()
    lap[np.diag_indices(g.n)] = g.degrees()
    return lap


@dataclass(frozen=True)
class ComponentDecomposition:
    """Connected components, numbered by decreasing size."""

    component_id: np.ndarray
    sizes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def largest(self) -> int:
        return self.sizes[0]

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.component_id == cid)


def connected_components(g: Graph) -> ComponentDecomposition:
    ncomp, raw = _cc(csr_matrix(g.adjacency), directed=False)
    sizes = np.bincount(raw, minlength=ncomp)
    first = np.full(ncomp, g.n)
    np.minimum.at(first, raw, np.arange(g.n))
    # largest first, ties by lowest member index
    order = sorted(range(ncomp), key=lambda c: (-sizes[c], first[c]))
    remap = np.empty(ncomp, dtype=int)
    remap[order] = np.arange(ncomp)
    return ComponentDecomposition(remap[raw], tuple(int(sizes[c]) for c in order))


def delete_node(g: Graph, j: int) -> Graph:
    """Remove node ``j`` (a position, not a label) with its incident edges."""
    if g.n == 1:
        raise ValueError("cannot delete the only node of a graph")
    if not 0 <= j < g.n:
        raise IndexError(f"node {j} out of range for n={g.n}")
    keep = np.delete(np.arange(g.n), j)
    return g.subgraph(keep)


def hop_distances(g: Graph, source: int) -> np.ndarray:
    """Unweighted hop counts from ``source``; ``-1`` for unreachable nodes."""
    order, pred = breadth_first_order(csr_matrix(g.adjacency), source, directed=False)
    dist = np.full(g.n, -1)
    dist[source] = 0
    for v in order[1:]:
        dist[v] = dist[pred[v]] + 1
    return dist


def h_neighborhood(g: Graph, j: int, h: int) -> Graph:
    """Induced subgraph on the nodes within ``h`` hops of ``j`` (``j`` first)."""
    if h < 0:
        raise ValueError("hop count must be non-negative")
    if not 0 <= j < g.n:
        raise IndexError(f"node {j} out of range for n={g.n}")
    dist = hop_distances(g, j)
    inside = np.flatnonzero((dist >= 0) & (dist <= h))
    nodes = [j] + [int(v) for v in inside if v != j]
    return g.subgraph(nodes)


def read_edge_list(path: str | Path) -> Graph:
    """Parse ``i<TAB>j<TAB>weight`` lines over node positions ``0..n-1``.

    ``#`` starts a comment.  Optional headers: ``n=<count>`` (otherwise the
    largest index plus one) and ``labels=<a>,<b>,...`` naming the positions.
    A missing weight means 1.
    """
    n = None
    labels = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("n="):
            n = int(line[2:])
            continue
        if line.startswith("labels="):
            labels = [t.strip() for t in line[7:].split(",")]
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'i j [weight]', got {raw!r}")
        w = float(parts[2]) if len(parts) == 3 else 1.0
        edges.append((int(parts[0]), int(parts[1]), w))
    if n is None:
        n = len(labels) if labels is not None else 1 + max((max(i, j) for i, j, _ in edges), default=-1)
    g = from_edge_list(edges, n)
    if labels is not None:
        if len(labels) != n:
            raise ValueError(f"{path}: {len(labels)} labels for {n} nodes")
        g = Graph(g.weights, labels)
    return g


def write_edge_list(g: Graph, path: str | Path) -> None:
    lines = [f"n={g.n}"]
    if list(g.labels) != list(range(g.n)):
        lines.append("labels=" + ",".join(str(lab) for lab in g.labels))
    iu, ju = np.nonzero(np.triu(g.weights))
    for i, j in zip(iu.tolist(), ju.tolist()):
        lines.append(f"{i}\t{j}\t{float(g.weights[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n")
