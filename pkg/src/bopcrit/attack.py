"""Sequential node-deletion attacks and their connectivity curves."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import CostPolicy, Graph
from .measures import TUNABLE, MeasureId, compute_scores, rank_graph

SINGLE = "single"
PERIODIC = "periodic"


class AttackError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"measure failed at attack step {step}: {cause}")
        self.step = step


@dataclass(frozen=True)
class AttackStrategy:
    """Rank once (``single``) or re-rank ``budget`` times (``periodic``)."""

    mode: str = SINGLE
    budget: int = 100

    def __post_init__(self):
        if self.mode not in (SINGLE, PERIODIC):
            raise ValueError(f"unknown strategy {self.mode!r}; expected 'single' or 'periodic'")
        if self.budget < 1:
            raise ValueError("ranking budget must be at least 1")

    def checkpoints(self, n: int) -> set[int]:
        """Deletion counts before which the ranking is recomputed."""
        if self.mode == SINGLE:
            return {0}
        steps = n - 1
        if steps <= self.budget:
            return set(range(steps))
        return {math.ceil(steps * t / self.budget) for t in range(self.budget)}

    def __str__(self):
        return self.mode if self.mode == SINGLE else f"{self.mode}:{self.budget}"


@dataclass(frozen=True)
class AttackStep:
    deleted_label: object
    bcc: int
    rbcc: float


@dataclass(frozen=True)
class AttackCurve:
    steps: tuple
    auc: float
    measure: str
    strategy: AttackStrategy
    params: dict = field(default_factory=dict)

    @property
    def rbcc(self) -> np.ndarray:
        return np.array([s.rbcc for s in self.steps])

    @property
    def bcc(self) -> np.ndarray:
        return np.array([s.bcc for s in self.steps])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "deleted_label", "bcc", "rbcc"])
        for k, s in enumerate(self.steps, 1):
            w.writerow([k, s.deleted_label, s.bcc, repr(s.rbcc)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"measure": self.measure, "strategy": str(self.strategy), "auc": self.auc, "params": self.params}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def auc(rbcc) -> float:
    """Area under an RBCC curve, normalised as the mean over the steps."""
    values = np.asarray(getattr(rbcc, "rbcc", rbcc), dtype=float)
    if values.size == 0:
        raise ValueError("empty attack curve")
    return float(values.mean())


def bcc_sequence(g: Graph, order) -> list[int]:
    """Biggest component size after each deletion in ``order`` (node positions).

    Nodes are re-inserted in reverse order with a union-find, so the whole
    curve costs about O(n^2) instead of one component search per step.
    """
    n = g.n
    parent = list(range(n))
    size = [1] * n
    present = [False] * n

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    nbrs = [np.flatnonzero(g.adjacency[v]).tolist() for v in range(n)]
    deleted = set(order)
    survivors = [v for v in range(n) if v not in deleted]
    best = 1 if survivors else 0
    for v in survivors:
        present[v] = True
    for v in survivors:
        for w in nbrs[v]:
            if present[w]:
                rv, rw = find(v), find(w)
                if rv != rw:
                    if size[rv] < size[rw]:
                        rv, rw = rw, rv
                    parent[rw] = rv
                    size[rv] += size[rw]
                    best = max(best, size[rv])
    out = []
    for v in reversed(order):
        out.append(best)
        present[v] = True
        best = max(best, 1)
        for w in nbrs[v]:
            if present[w]:
                rv, rw = find(v), find(w)
                if rv != rw:
                    if size[rv] < size[rw]:
                        rv, rw = rw, rv
                    parent[rw] = rv
                    size[rv] += size[rw]
                    best = max(best, size[rv])
    return out[::-1]


def deletion_order(
    g: Graph,
    measure: MeasureId,
    strategy: AttackStrategy = AttackStrategy(),
    policy: CostPolicy = CostPolicy(),
    seed: int = 0,
    scores: np.ndarray | None = None,
) -> list[int]:
    """Positions of the ``n - 1`` nodes in the order they get deleted.

    ``scores`` may carry a precomputed ranking of the intact graph.
    """
    checkpoints = strategy.checkpoints(g.n)
    alive = list(range(g.n))
    current = g
    queue: list[int] = []
    order = []
    for k in range(g.n - 1):
        if k in checkpoints:
            try:
                s = scores if (k == 0 and scores is not None) else compute_scores(current, measure, policy, seed)
            except Exception as exc:
                raise AttackError(k, exc) from exc
            queue = [alive[i] for i in rank_graph(current, s).order]
        victim = queue.pop(0)
        order.append(victim)
        pos = alive.index(victim)
        alive.pop(pos)
        if k + 1 in checkpoints:
            current = g.subgraph(alive)
    return order


def run_attack(
    g: Graph,
    measure: MeasureId | str,
    strategy: AttackStrategy = AttackStrategy(),
    policy: CostPolicy = CostPolicy(),
    seed: int = 0,
    scores: np.ndarray | None = None,
) -> AttackCurve:
    """Delete ``n - 1`` nodes by decreasing criticality and record BCC/RBCC."""
    m = MeasureId.parse(measure) if isinstance(measure, str) else measure
    if g.n < 2:
        raise ValueError("an attack needs at least two nodes")
    order = deletion_order(g, m, strategy, policy, seed, scores)
    bccs = bcc_sequence(g, order)
    steps = tuple(
        AttackStep(g.labels[v], b, b / (g.n - k)) for k, (v, b) in enumerate(zip(order, bccs), 1)
    )
    params = dict(m.params)
    if m.name == "bl" and "seed" not in params:
        params["seed"] = seed
    return AttackCurve(steps, auc([s.rbcc for s in steps]), m.name, strategy, params)


def tune_parameter(
    g: Graph,
    family: str,
    grid,
    strategy: AttackStrategy = AttackStrategy(),
    policy: CostPolicy = CostPolicy(),
    seed: int = 0,
    base: MeasureId | None = None,
):
    """Attack with every grid value and keep the one with the smallest AUC.

    Ties go to the smaller parameter.  Returns ``(best_value, curve)``.
    """
    if family not in TUNABLE:
        raise ValueError(f"measure {family!r} has no tunable parameter")
    values = sorted(grid)
    if not values:
        raise ValueError("empty parameter grid")
    key = TUNABLE[family]
    base = base or MeasureId(family)
    best = None
    for value in values:
        curve = run_attack(g, base.with_params(**{key: value}), strategy, policy, seed)
        if best is None or curve.auc < best[1].auc:
            best = (value, curve)
    return best
