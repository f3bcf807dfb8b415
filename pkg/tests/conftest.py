import os

import numpy as np
import pytest

from bopcrit.graph import Graph, from_edge_list

# six-node example graph, nodes labelled 1..6
TOY_EDGES = [(1, 2), (2, 3), (2, 4), (4, 5), (2, 5), (5, 6), (1, 6)]


def toy_graph() -> Graph:
    g = from_edge_list([(i - 1, j - 1, 1.0) for i, j in TOY_EDGES], 6)
    return Graph(g.weights, [1, 2, 3, 4, 5, 6])


def path_graph(n: int) -> Graph:
    return from_edge_list([(i, i + 1, 1.0) for i in range(n - 1)], n)


def cycle_graph(n: int) -> Graph:
    return from_edge_list([(i, (i + 1) % n, 1.0) for i in range(n)], n)


def star_graph(leaves: int) -> Graph:
    return from_edge_list([(0, i, 1.0) for i in range(1, leaves + 1)], leaves + 1)


def complete_graph(n: int) -> Graph:
    return from_edge_list([(i, j, 1.0) for i in range(n) for j in range(i + 1, n)], n)


def random_connected(n: int, p: float, seed: int, weighted: bool = False) -> Graph:
    """Random spanning tree plus extra ER edges, optionally weighted."""
    rng = np.random.default_rng(seed)
    a = np.zeros((n, n))
    perm = rng.permutation(n)
    for k in range(1, n):
        i, j = perm[k], perm[rng.integers(k)]
        a[i, j] = a[j, i] = 1.0
    extra = np.triu(rng.random((n, n)) < p, k=1)
    a = np.maximum(a, (extra | extra.T).astype(float))
    if weighted:
        w = np.triu(rng.uniform(0.5, 2.0, (n, n)), k=1)
        a = a * (w + w.T)
    return Graph(a)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("BOPCRIT_PAPER_SCALE") == "1":
        return
    skip = pytest.mark.skip(reason="set BOPCRIT_PAPER_SCALE=1 to run")
    for item in items:
        if "paperscale" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def toy():
    return toy_graph()


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the summary prints them after the run."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(criterion: int, ok: bool, detail: str) -> bool:
        lines.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
