"""Classical centrality and criticality measures, plus node ranking.

Node-level scores follow the convention *larger = more critical*.  Global
indices (Wiener, Kirchhoff, Kemeny, shield value) are turned into node
scores by :func:`derived_criticality`, which compares the index of the
graph with and without each node.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import bop
from .graph import CostPolicy, Graph, connected_components, cost_matrix, delete_node, h_neighborhood, laplacian
from .linalg import algebraic_connectivity, dominant_eigenvalue, expm_diag, laplacian_pseudoinverse

GLOBAL_MEASURES = ("wie", "kir", "kem", "shv")


# ---------------------------------------------------------------------------
# node betweenness / centrality


def ec(g: Graph) -> np.ndarray:
    """Weighted degree."""
    return g.degrees()


def _dist_close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(abs(a), abs(b))


def spb(g: Graph, policy: CostPolicy = CostPolicy()) -> np.ndarray:
    """Shortest-path betweenness over ordered (source, target) pairs.

    Brandes' accumulation with Dijkstra on the policy costs; all shortest
    paths count, each pair contributing the fraction of them through a node.
    """
    n = g.n
    cost = cost_matrix(g, policy)
    nbrs = [np.flatnonzero(g.adjacency[v]).tolist() for v in range(n)]
    score = np.zeros(n)
    for s in range(n):
        dist = [math.inf] * n
        sigma = [0.0] * n
        preds = [[] for _ in range(n)]
        done = [False] * n
        order = []
        dist[s] = 0.0
        sigma[s] = 1.0
        heap = [(0.0, s)]
        while heap:
            d, v = heapq.heappop(heap)
            if done[v]:
                continue
            done[v] = True
            order.append(v)
            for w in nbrs[v]:
                if done[w]:
                    continue
                nd = d + cost[v, w]
                if dist[w] < math.inf and _dist_close(nd, dist[w]):
                    sigma[w] += sigma[v]
                    preds[w].append(v)
                elif nd < dist[w]:
                    dist[w] = nd
                    sigma[w] = sigma[v]
                    preds[w] = [v]
                    heapq.heappush(heap, (nd, w))
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return score


def _component_pinv(g: Graph) -> np.ndarray:
    """Laplacian pseudoinverse assembled block-wise over components."""
    comps = connected_components(g)
    lap = laplacian(g)
    pinv = np.zeros((g.n, g.n))
    for cid in range(comps.count):
        idx = comps.members(cid)
        if len(idx) > 1:
            pinv[np.ix_(idx, idx)] = laplacian_pseudoinverse(lap[np.ix_(idx, idx)])
    return pinv


def rwb(g: Graph) -> np.ndarray:
    """Newman's current-flow (random-walk) betweenness.

    A unit current is sent between every unordered pair ``(s, t)``; a
    node's throughput is half the absolute current on its incident edges.
    Only intermediate nodes are credited, source and target are not.
    """
    n = g.n
    t = _component_pinv(g)
    iu, ju = np.nonzero(np.triu(g.weights))
    a = g.weights[iu, ju]
    m = len(a)
    score = np.zeros(n)
    if m == 0:
        return score
    # unsigned incidence: throughput = 0.5 * |B| @ |edge currents|
    inc = csr_matrix(
        (np.ones(2 * m), (np.concatenate([iu, ju]), np.concatenate([np.arange(m), np.arange(m)]))),
        shape=(n, m),
    )
    comp = connected_components(g).component_id
    for s in range(n - 1):
        targets = np.arange(s + 1, n)
        targets = targets[comp[targets] == comp[s]]
        if len(targets) == 0:
            continue
        # potentials for each pair (s, t): v_i = T_is - T_it
        pot = t[:, [s]] - t[:, targets]
        current = a[:, None] * np.abs(pot[iu] - pot[ju])
        through = 0.5 * (inc @ current)
        through[s, :] = 0.0
        through[targets, np.arange(len(targets))] = 0.0
        score += through.sum(axis=1)
    return score


def est(g: Graph) -> np.ndarray:
    """Estrada subgraph centrality, ``diag(expm(A))``."""
    return expm_diag(g.weights)


def wk(g: Graph, h: int = 1) -> np.ndarray:
    """Wehmuth's K: algebraic connectivity of the ``h``-hop neighbourhood
    over ``log2`` of the node degree.

    The degree here is the neighbour count.  The denominator is clamped to
    ``max(log2(d), 1)`` so low-degree nodes stay defined; isolated nodes
    score 0.
    """
    if h < 1:
        raise ValueError("WK needs h >= 1")
    deg = g.neighbor_counts()
    cache = {}
    score = np.zeros(g.n)
    for j in range(g.n):
        if deg[j] == 0:
            continue
        sub = h_neighborhood(g, j, h)
        key = frozenset(sub.labels)
        if key not in cache:
            cache[key] = algebraic_connectivity(laplacian(sub))
        score[j] = cache[key] / max(math.log2(deg[j]), 1.0)
    return score


def wk_criticality(g: Graph, h: int = 1) -> np.ndarray:
    """WK turned into a criticality: ``-K``, since a node whose neighbourhood
    is poorly connected is the fragile one.  Isolated nodes hold nothing
    together and get ``-inf``."""
    k = wk(g, h)
    out = -k
    out[g.neighbor_counts() == 0] = -np.inf
    return out


def kle(g: Graph) -> np.ndarray:
    """Klein's Kirchhoff-based criticality summed over incident edges:
    ``sum_i a_ij (e_i - e_j)' (L+)^2 (e_i - e_j)``."""
    sq = _component_pinv(g)
    sq = sq @ sq
    d = np.diag(sq)
    quad = d[:, None] + d[None, :] - 2.0 * sq
    return (g.weights * quad).sum(axis=0)


# ---------------------------------------------------------------------------
# global indices


def shortest_path_distances(g: Graph, policy: CostPolicy = CostPolicy()) -> np.ndarray:
    cost = cost_matrix(g, policy)
    cost[~np.isfinite(cost)] = 0.0
    return shortest_path(csr_matrix(cost), method="D", directed=False)


def wiener(g: Graph, policy: CostPolicy = CostPolicy()) -> float:
    """Half the sum of all shortest-path distances; unreachable pairs add 0."""
    d = shortest_path_distances(g, policy)
    return 0.5 * float(d[np.isfinite(d)].sum())


def resistance_distances(g: Graph) -> np.ndarray:
    """Effective resistances within components; ``inf`` across components."""
    t = _component_pinv(g)
    d = np.diag(t)
    r = d[:, None] + d[None, :] - 2.0 * t
    comp = connected_components(g).component_id
    r[comp[:, None] != comp[None, :]] = np.inf
    np.fill_diagonal(r, 0.0)
    return r


def kirchhoff(g: Graph) -> float:
    """Half the sum of effective resistances; unreachable pairs add 0."""
    r = resistance_distances(g)
    return 0.5 * float(r[np.isfinite(r)].sum())


def kemeny(g: Graph) -> float:
    """Kemeny constant ``sum_j pi_j m_ij`` (with ``m_jj = 0``).

    Computed per component as ``sum 1/(1 - lambda)`` over the non-unit
    eigenvalues of ``D^-1/2 A D^-1/2``; components are combined by a
    size-weighted average and singletons count as 0.
    """
    comps = connected_components(g)
    total = 0.0
    for cid in range(comps.count):
        idx = comps.members(cid)
        if len(idx) < 2:
            continue
        a = g.weights[np.ix_(idx, idx)]
        inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
        lam = np.linalg.eigvalsh(inv_sqrt[:, None] * a * inv_sqrt[None, :])
        k = float(np.sum(1.0 / (1.0 - lam[:-1])))
        total += len(idx) / g.n * k
    return total


def shield(g: Graph) -> float:
    """Shield value: dominant adjacency eigenvalue."""
    return dominant_eigenvalue(g.weights)


def global_index(g: Graph, name: str, policy: CostPolicy = CostPolicy()) -> float:
    if name == "wie":
        return wiener(g, policy)
    if name == "kir":
        return kirchhoff(g)
    if name == "kem":
        return kemeny(g)
    if name == "shv":
        return shield(g)
    raise ValueError(f"unknown global measure {name!r}; expected one of {GLOBAL_MEASURES}")


# index drop counts as damage for these; Kemeny damage is an increase
_DROP_IS_DAMAGE = {"wie": True, "kir": True, "shv": True, "kem": False}


def derived_criticality(g: Graph, measure: str, policy: CostPolicy = CostPolicy()) -> np.ndarray:
    """Node criticality from a global index: change caused by deleting each node.

    Wiener, Kirchhoff and shield value score ``cr(G) - cr(G \\ j)``: pairs
    that become unreachable drop out of the distance sums, so disconnecting
    the graph lowers the index.  Kemeny scores ``cr(G \\ j) - cr(G)``.
    """
    if measure not in GLOBAL_MEASURES:
        raise ValueError(f"unknown global measure {measure!r}; expected one of {GLOBAL_MEASURES}")
    if g.n < 2:
        raise ValueError("derived criticality needs at least two nodes")
    base = global_index(g, measure, policy)
    after = np.array([global_index(delete_node(g, j), measure, policy) for j in range(g.n)])
    return base - after if _DROP_IS_DAMAGE[measure] else after - base


def baseline_random(g: Graph, seed: int = 0) -> np.ndarray:
    """Random ranking: a seeded permutation of ``1..n`` as scores."""
    rng = np.random.default_rng(seed)
    return rng.permutation(g.n).astype(float) + 1.0


# ---------------------------------------------------------------------------
# ranking


@dataclass(frozen=True)
class Ranking:
    """Nodes ordered from most to least critical.

    ``tie_break`` says, for each position after the first, which rule put
    the node behind its predecessor: ``score``, ``degree`` or ``label``.
    """

    order: tuple
    scores: np.ndarray = field(compare=False)
    tie_break: tuple = field(compare=False)

    def positions(self) -> list[int]:
        return list(self.order)


def rank_nodes(
    scores: Sequence[float],
    degrees: Sequence[float] | None = None,
    labels: Sequence[Hashable] | None = None,
) -> Ranking:
    """Sort node positions by decreasing score (``inf`` first).

    Ties go to the higher degree, then to the smaller label.  ``order``
    holds node positions; map them through ``labels`` for identifiers.
    """
    s = np.asarray(scores, dtype=float)
    if np.any(np.isnan(s)):
        raise ValueError("cannot rank NaN scores")
    n = len(s)
    deg = np.zeros(n) if degrees is None else np.asarray(degrees, dtype=float)
    lab = list(range(n)) if labels is None else list(labels)
    keys = [(-s[i], -deg[i], lab[i]) for i in range(n)]
    order = sorted(range(n), key=keys.__getitem__)
    trace = []
    for prev, cur in zip(order, order[1:]):
        if keys[prev][0] != keys[cur][0]:
            trace.append("score")
        elif keys[prev][1] != keys[cur][1]:
            trace.append("degree")
        else:
            trace.append("label")
    return Ranking(tuple(order), s, tuple(trace))


def rank_graph(g: Graph, scores: Sequence[float]) -> Ranking:
    return rank_nodes(scores, g.degrees(), g.labels)


# ---------------------------------------------------------------------------
# measure identifiers

_PARAMS = {
    "ec": {},
    "spb": {},
    "rwb": {},
    "est": {},
    "wk": {"h": int},
    "kle": {},
    "wie": {},
    "kir": {},
    "kem": {},
    "shv": {},
    "bpc": {"theta": float, "variant": str, "direction": str},
    "bpcf": {"theta": float, "variant": str, "direction": str},
    "bl": {"seed": int},
}
TUNABLE = {"wk": "h", "bpc": "theta", "bpcf": "theta"}
ALL_MEASURES = ("bl", "ec", "spb", "rwb", "est", "wk", "kle", "wie", "kir", "kem", "shv", "bpcf", "bpc")


@dataclass(frozen=True)
class MeasureId:
    """A measure name with its parameters, e.g. ``wk:h=2`` or ``bpc:theta=1``."""

    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in _PARAMS:
            raise ValueError(f"unknown measure {self.name!r}; expected one of {sorted(_PARAMS)}")
        allowed = _PARAMS[self.name]
        params = dict(self.params)
        for key, value in params.items():
            if key not in allowed:
                raise ValueError(f"measure {self.name!r} takes no parameter {key!r}")
            params[key] = allowed[key](value)
        if "h" in params and params["h"] < 1:
            raise ValueError("wk needs h >= 1")
        if "theta" in params and not params["theta"] > 0:
            raise ValueError("theta must be positive")
        if params.get("variant", bop.STANDARD) not in bop.VARIANTS:
            raise ValueError(f"variant must be one of {bop.VARIANTS}")
        if params.get("direction", bop.ALGORITHM) not in bop.DIRECTIONS:
            raise ValueError(f"direction must be one of {bop.DIRECTIONS}")
        object.__setattr__(self, "params", tuple(sorted(params.items())))

    @classmethod
    def parse(cls, text: str) -> "MeasureId":
        name, _, rest = text.strip().lower().partition(":")
        params = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed measure parameter {item!r} in {text!r}")
            params[key.strip()] = value.strip()
        return cls(name, tuple(params.items()))

    def with_params(self, **kw) -> "MeasureId":
        return MeasureId(self.name, tuple({**dict(self.params), **kw}.items()))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @property
    def needs_tuning(self) -> bool:
        """True when a tunable parameter still has to be chosen."""
        return self.name in TUNABLE and TUNABLE[self.name] not in dict(self.params)

    def __str__(self):
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params)


def compute_scores(g: Graph, measure: MeasureId | str, policy: CostPolicy = CostPolicy(), seed: int = 0) -> np.ndarray:
    """Node criticality scores of ``g`` under ``measure``.

    Parameterised measures fall back to ``h=1`` / ``theta=1`` when the
    parameter is missing; ``bl`` uses ``seed`` unless it carries its own.
    """
    m = MeasureId.parse(measure) if isinstance(measure, str) else measure
    p = dict(m.params)
    name = m.name
    if name == "ec":
        return ec(g)
    if name == "spb":
        return spb(g, policy)
    if name == "rwb":
        return rwb(g)
    if name == "est":
        return est(g)
    if name == "wk":
        return wk_criticality(g, p.get("h", 1))
    if name == "kle":
        return kle(g)
    if name in GLOBAL_MEASURES:
        return derived_criticality(g, name, policy)
    if name in ("bpc", "bpcf"):
        fn = bop.bpc if name == "bpc" else bop.bpcf
        return fn(
            g,
            policy,
            p.get("theta", 1.0),
            p.get("variant", bop.STANDARD),
            p.get("direction", bop.ALGORITHM),
        ).scores
    return baseline_random(g, p.get("seed", seed))
