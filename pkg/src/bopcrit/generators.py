"""Seeded Erdos-Renyi and Albert-Barabasi graph generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

ER_P_MAX = 0.5
AB_M_VALUES = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class GeneratorSpec:
    """One generated graph: ``kind`` is ``"er"`` (param = p) or ``"ab"`` (param = m)."""

    kind: str
    n: int
    param: float
    seed: int

    def __post_init__(self):
        if self.kind == "er":
            if not 0 < self.param <= ER_P_MAX:
                raise ValueError(f"ER edge probability must lie in (0, {ER_P_MAX}], got {self.param}")
        elif self.kind == "ab":
            if self.param not in AB_M_VALUES:
                raise ValueError(f"AB attachment count must be one of {AB_M_VALUES}, got {self.param}")
            object.__setattr__(self, "param", int(self.param))
            if self.n < self.param + 1:
                raise ValueError(f"AB graph needs n >= m + 1, got n={self.n}, m={self.param}")
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected 'er' or 'ab'")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    def build(self) -> Graph:
        if self.kind == "er":
            return erdos_renyi(self.n, self.param, self.seed)
        return albert_barabasi(self.n, self.param, self.seed)

    def manifest_row(self) -> str:
        param = f"{self.param:.17g}" if self.kind == "er" else str(self.param)
        return f"{self.kind},{self.n},{param},{self.seed}"


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): every pair is joined by a unit edge with probability ``p``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    a = (upper | upper.T).astype(float)
    return Graph(a)


def albert_barabasi(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment grown from the complete graph on ``m + 1`` nodes.

    Each new node draws ``m`` distinct targets with probability
    proportional to their current degree, redrawing on repeats.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if n < m + 1:
        raise ValueError(f"need n >= m + 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    a = np.zeros((n, n))
    a[: m + 1, : m + 1] = 1.0
    np.fill_diagonal(a, 0.0)
    # each node appears once per unit of degree
    stubs = [v for v in range(m + 1) for _ in range(m)]
    for new in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(stubs[rng.integers(len(stubs))])
        for t in sorted(targets):
            a[new, t] = a[t, new] = 1.0
            stubs.append(t)
        stubs.extend([new] * m)
    return Graph(a)


def sample_population(
    count: int,
    kind: str,
    n_range: tuple[int, int] = (5, 500),
    seed: int = 0,
) -> list[tuple[GeneratorSpec, Graph]]:
    """Draw ``count`` graphs with ``n`` uniform in ``n_range`` (inclusive).

    ER graphs get ``p`` uniform in ``(0, 0.5]``, AB graphs ``m`` uniform in
    ``{1..6}`` (capped at ``n - 1`` for tiny graphs).
    """
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid size range {n_range}")
    if kind not in ("er", "ab"):
        raise ValueError(f"unknown generator kind {kind!r}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(lo, hi + 1))
        if kind == "er":
            param = float(ER_P_MAX * (1.0 - rng.random()))
        else:
            param = int(rng.integers(1, min(max(AB_M_VALUES), n - 1) + 1)) if n > 1 else 1
        graph_seed = int(rng.integers(2**31 - 1))
        spec = GeneratorSpec(kind, max(n, 2) if kind == "ab" else n, param, graph_seed)
        out.append((spec, spec.build()))
    return out
