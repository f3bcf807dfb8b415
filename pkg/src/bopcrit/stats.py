"""Cross-measure statistics: Kendall correlation, Friedman/Nemenyi ranks,
Borda aggregation, Ward clustering and mean/std summaries."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform
from scipy.stats import kendalltau, rankdata

# Studentized range quantiles divided by sqrt(2), infinite degrees of
# freedom (Demsar 2006 style), for k = 2..30 compared methods.
Q_ALPHA = {
    0.05: (
        1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219,
        3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544, 3.569,
        3.593, 3.616, 3.637, 3.658, 3.678, 3.696, 3.714, 3.732, 3.749,
    ),
    0.10: (
        1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
        3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319, 3.346,
        3.371, 3.394, 3.417, 3.439, 3.459, 3.479, 3.498, 3.516, 3.533,
    ),
}


def nemenyi_q(k: int, alpha: float = 0.05) -> float:
    if alpha not in Q_ALPHA:
        raise ValueError(f"alpha must be one of {sorted(Q_ALPHA)}")
    if not 2 <= k <= 30:
        raise ValueError(f"Nemenyi table covers 2..30 methods, got {k}")
    return Q_ALPHA[alpha][k - 2]


def critical_difference(k: int, n_datasets: int, alpha: float = 0.05) -> float:
    return nemenyi_q(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * n_datasets))


@dataclass(frozen=True)
class BenchmarkTable:
    """AUC per graph (rows) and measure (columns)."""

    measures: tuple
    graphs: tuple
    auc: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.auc, dtype=float)
        if a.shape != (len(self.graphs), len(self.measures)):
            raise ValueError(f"AUC table shape {a.shape} does not match {len(self.graphs)} graphs x {len(self.measures)} measures")
        if np.any(~np.isfinite(a)) or np.any(a <= 0) or np.any(a > 1):
            raise ValueError("every AUC cell must lie in (0, 1]")
        object.__setattr__(self, "measures", tuple(self.measures))
        object.__setattr__(self, "graphs", tuple(self.graphs))
        object.__setattr__(self, "auc", a)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["graph", *(f"{m}_auc" for m in self.measures)])
        for g, row in zip(self.graphs, self.auc):
            w.writerow([g, *(repr(float(v)) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchmarkTable":
        rows = list(csv.reader(io.StringIO(text)))
        measures = [h.removesuffix("_auc") for h in rows[0][1:]]
        return cls(measures, [r[0] for r in rows[1:]], np.array([[float(v) for v in r[1:]] for r in rows[1:]]))


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall correlation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("score vectors must be 1-D and of equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("Kendall tau is undefined for a constant score vector")
    return float(kendalltau(x, y, variant="b").statistic)


def correlation_matrix(per_graph_scores: Sequence[Mapping[str, Sequence[float]]], measures: Sequence[str]) -> np.ndarray:
    """Mean per-graph tau-b between every pair of measures.

    Graphs where a pair is undefined (a constant score vector) are left out
    of that pair's mean; a pair undefined everywhere is NaN.
    """
    if not per_graph_scores:
        raise ValueError("need at least one graph")
    k = len(measures)
    out = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            taus = []
            for scores in per_graph_scores:
                try:
                    taus.append(kendall_tau_b(scores[measures[a]], scores[measures[b]]))
                except ValueError:
                    continue
            out[a, b] = out[b, a] = float(np.mean(taus)) if taus else math.nan
    return out


@dataclass(frozen=True)
class NemenyiResult:
    """Mean Friedman ranks (larger = better) and the Nemenyi critical difference."""

    measures: tuple
    mean_ranks: np.ndarray
    critical_difference: float
    alpha: float
    n_graphs: int

    def ordered(self) -> list[tuple[str, float]]:
        idx = np.argsort(-self.mean_ranks, kind="stable")
        return [(self.measures[i], float(self.mean_ranks[i])) for i in idx]

    def not_worse_than_best(self) -> list[str]:
        """Measures within one critical difference of the best mean rank."""
        top = self.mean_ranks.max()
        return [m for m, r in zip(self.measures, self.mean_ranks) if top - r <= self.critical_difference]


def _flipped_ranks(auc: np.ndarray) -> np.ndarray:
    # rank 1 = smallest AUC, midranks for ties, then flipped so larger is better
    k = auc.shape[1]
    return k + 1 - rankdata(auc, axis=1, method="average")


def friedman_nemenyi(table: BenchmarkTable, alpha: float = 0.05) -> NemenyiResult:
    k = len(table.measures)
    n = len(table.graphs)
    if k < 2 or n < 2:
        raise ValueError("Friedman/Nemenyi needs at least two measures and two graphs")
    ranks = _flipped_ranks(table.auc)
    return NemenyiResult(table.measures, ranks.mean(axis=0), critical_difference(k, n, alpha), alpha, n)


def borda(table: BenchmarkTable) -> list[tuple[str, float]]:
    """Measures by summed Borda points, best first.

    On each graph the smallest AUC earns ``k`` points, the next ``k - 1`` and
    so on, tied measures sharing the average.
    """
    if len(table.measures) < 1 or len(table.graphs) < 1:
        raise ValueError("empty benchmark table")
    points = _flipped_ranks(table.auc).sum(axis=0)
    idx = np.argsort(-points, kind="stable")
    return [(table.measures[i], float(points[i])) for i in idx]


@dataclass(frozen=True)
class Merge:
    step: int
    left: str
    right: str
    height: float


def ward_cluster(corr: np.ndarray, labels: Sequence[str]) -> list[Merge]:
    """Ward agglomeration on the distance ``1 - tau``.

    Merged clusters are referred to as ``#<step>`` in later merges.
    """
    c = np.asarray(corr, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] != len(labels):
        raise ValueError("correlation matrix must be square and match the labels")
    if not np.allclose(c, c.T, atol=1e-12, equal_nan=True):
        raise ValueError("correlation matrix must be symmetric")
    if np.any(np.isnan(c)):
        raise ValueError("correlation matrix contains undefined entries")
    n = len(labels)
    if n < 2:
        return []
    dist = np.clip(1.0 - c, 0.0, None)
    np.fill_diagonal(dist, 0.0)
    z = linkage(squareform(dist, checks=False), method="ward")
    names = list(labels)
    merges = []
    for step, (a, b, h, _) in enumerate(z, 1):
        merges.append(Merge(step, names[int(a)], names[int(b)], float(h)))
        names.append(f"#{step}")
    return merges


def merges_to_csv(merges: Sequence[Merge]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "left", "right", "height"])
    for m in merges:
        w.writerow([m.step, m.left, m.right, repr(m.height)])
    return buf.getvalue()


@dataclass(frozen=True)
class Summary:
    mean: float
    std: float
    count: int

    @property
    def single(self) -> bool:
        return self.count == 1

    def __str__(self):
        return f"{self.mean:.4f} ± {self.std:.4f}"


def summarize(table: BenchmarkTable) -> dict[str, Summary]:
    """Mean and sample standard deviation of each measure's AUC."""
    if len(table.graphs) == 0:
        raise ValueError("empty benchmark table")
    n = len(table.graphs)
    out = {}
    for i, m in enumerate(table.measures):
        col = table.auc[:, i]
        std = float(col.std(ddof=1)) if n > 1 else 0.0
        out[m] = Summary(float(col.mean()), std, n)
    return out
