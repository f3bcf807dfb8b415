"""End-to-end experiments: populations, attack benchmarks, correlations and
timings.

Every graph is rebuilt from its :class:`GeneratorSpec`, so work can be
shipped to worker processes as plain specs and results are the same
whatever the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .attack import AttackStrategy, run_attack, tune_parameter
from .bop import bpc, bpcf
from .config import ExperimentConfig
from .generators import GeneratorSpec, erdos_renyi, sample_population
from .graph import CostPolicy
from .measures import TUNABLE, MeasureId, compute_scores
from .stats import BenchmarkTable, borda, correlation_matrix, friedman_nemenyi, summarize, ward_cluster

_KIND_TAG = {"ab": 1, "er": 2}


def population_seed(master: int, kind: str) -> int:
    """Seed of one generator's population, derived from the master seed."""
    return int(np.random.SeedSequence([master, _KIND_TAG[kind]]).generate_state(1)[0])


def population_specs(config: ExperimentConfig, kind: str) -> list[GeneratorSpec]:
    pop = sample_population(config.count, kind, (config.n_min, config.n_max), population_seed(config.seed, kind))
    return [spec for spec, _ in pop]


def graph_name(index: int, spec: GeneratorSpec) -> str:
    return f"{spec.kind}{index:03d}"


def _policy(config: ExperimentConfig) -> CostPolicy:
    return CostPolicy(config.policy)


def resolve_measure(text: str, config: ExperimentConfig) -> MeasureId:
    """Parse a measure and fill in the configured BoP variant and direction."""
    m = MeasureId.parse(text)
    if m.name in ("bpc", "bpcf"):
        extra = {k: v for k, v in (("variant", config.variant), ("direction", config.direction)) if m.get(k) is None}
        m = m.with_params(**extra)
    return m


def tuning_grid(m: MeasureId, config: ExperimentConfig) -> tuple:
    return config.h_grid if TUNABLE[m.name] == "h" else config.theta_grid


# ---------------------------------------------------------------------------
# attack benchmark


@dataclass(frozen=True)
class CellResult:
    graph: str
    measure: str
    auc: float | None = None
    params: dict = field(default_factory=dict)
    error: str | None = None


def evaluate_cell(name: str, spec: GeneratorSpec, measure: str, config: ExperimentConfig) -> CellResult:
    """AUC of one measure on one graph, tuning its parameter when needed.

    Errors are caught and returned so one bad cell does not sink a run.
    """
    try:
        g = spec.build()
        m = resolve_measure(measure, config)
        strategy = AttackStrategy(config.strategy, config.budget)
        if m.needs_tuning:
            value, curve = tune_parameter(g, m.name, tuning_grid(m, config), strategy, _policy(config), spec.seed, m)
            params = {**dict(m.params), TUNABLE[m.name]: value}
        else:
            curve = run_attack(g, m, strategy, _policy(config), spec.seed)
            params = dict(curve.params)
        return CellResult(name, measure, curve.auc, params)
    except Exception as exc:  # reported, not raised
        return CellResult(name, measure, error=f"{type(exc).__name__}: {exc}")


def _evaluate_packed(args):
    return evaluate_cell(*args)


def _run_cells(tasks: list, jobs: int, progress: Callable[[CellResult], None] | None) -> list[CellResult]:
    results = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for r in pool.map(_evaluate_packed, tasks, chunksize=1):
                results.append(r)
                if progress:
                    progress(r)
    else:
        for t in tasks:
            r = _evaluate_packed(t)
            results.append(r)
            if progress:
                progress(r)
    return results


@dataclass
class KindResult:
    kind: str
    specs: list
    table: BenchmarkTable | None
    cells: list
    failures: list

    def report(self, alpha: float) -> dict:
        out = {"kind": self.kind, "graphs": len(self.specs), "failures": len(self.failures)}
        if self.table is None or len(self.table.graphs) == 0:
            out["note"] = "no complete rows"
            return out
        out["summary"] = {m: {"mean": s.mean, "std": s.std, "count": s.count} for m, s in summarize(self.table).items()}
        out["borda"] = [[m, p] for m, p in borda(self.table)]
        if len(self.table.graphs) >= 2 and len(self.table.measures) >= 2:
            nem = friedman_nemenyi(self.table, alpha)
            out["nemenyi"] = {
                "alpha": nem.alpha,
                "k": len(nem.measures),
                "n_graphs": nem.n_graphs,
                "critical_difference": nem.critical_difference,
                "mean_ranks": [[m, r] for m, r in nem.ordered()],
                "not_worse_than_best": nem.not_worse_than_best(),
            }
        return out


def run_kind(config: ExperimentConfig, kind: str, progress=None) -> KindResult:
    specs = population_specs(config, kind)
    names = [graph_name(i, s) for i, s in enumerate(specs)]
    tasks = [(name, spec, m, config) for name, spec in zip(names, specs) for m in config.measures]
    cells = _run_cells(tasks, config.jobs, progress)
    failures = [c for c in cells if c.error is not None]
    bad = {c.graph for c in failures}
    auc = {(c.graph, c.measure): c.auc for c in cells if c.error is None}
    keep = [n for n in names if n not in bad]
    table = None
    if keep:
        table = BenchmarkTable(config.measures, keep, np.array([[auc[(g, m)] for m in config.measures] for g in keep]))
    return KindResult(kind, specs, table, cells, failures)


def run_benchmark(config: ExperimentConfig, progress=None) -> dict[str, KindResult]:
    return {kind: run_kind(config, kind, progress) for kind in config.kinds}


def manifest_csv(specs: Sequence[GeneratorSpec]) -> str:
    return "kind,n,param,seed\n" + "".join(s.manifest_row() + "\n" for s in specs)


def params_csv(cells: Sequence[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph", "measure", "auc", "params"])
    for c in cells:
        if c.error is None:
            w.writerow([c.graph, c.measure, repr(c.auc), json.dumps(c.params, sort_keys=True)])
    return buf.getvalue()


def failures_csv(cells: Sequence[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["graph", "measure", "error"])
    for c in cells:
        w.writerow([c.graph, c.measure, c.error])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# correlations


def _scores_for(args):
    spec, measures, config = args
    g = spec.build()
    return {m: compute_scores(g, resolve_measure(m, config), _policy(config), spec.seed) for m in measures}


def population_scores(config: ExperimentConfig, measures: Sequence[str] | None = None) -> list[dict]:
    """Criticality scores of every population graph under fixed-parameter measures."""
    measures = tuple(measures or config.correlation_measures)
    specs = [s for kind in config.kinds for s in population_specs(config, kind)]
    tasks = [(s, measures, config) for s in specs]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_scores_for, tasks, chunksize=1))
    return [_scores_for(t) for t in tasks]


def run_correlation(config: ExperimentConfig, measures: Sequence[str] | None = None):
    """Mean Kendall tau-b matrix and its Ward merge list."""
    measures = tuple(measures or config.correlation_measures)
    corr = correlation_matrix(population_scores(config, measures), measures)
    merges = ward_cluster(corr, measures) if not np.any(np.isnan(corr)) else []
    return corr, merges


def matrix_csv(corr: np.ndarray, labels: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", *labels])
    for lab, row in zip(labels, corr):
        w.writerow([lab, *(repr(float(v)) for v in row)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingRow:
    n: int
    t_bpc: float
    t_bpcf: float

    @property
    def ratio(self) -> float:
        return self.t_bpc / self.t_bpcf


def _best_time(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return float(best)


def run_complexity(sizes: Sequence[int], theta: float = 1.0, p: float = 0.1, seed: int = 0, repeats: int = 3) -> list[TimingRow]:
    """Wall times (seconds, best of ``repeats``) of BPC and BPCf on ER(n, p) graphs."""
    sizes = list(sizes)
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be strictly ascending")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    rows = []
    for n in sizes:
        g = erdos_renyi(n, p, seed + n)
        t_exact = _best_time(lambda: bpc(g, theta=theta), repeats)
        t_fast = _best_time(lambda: bpcf(g, theta=theta), repeats)
        rows.append(TimingRow(n, t_exact, t_fast))
    return rows


def complexity_csv(rows: Sequence[TimingRow]) -> str:
    lines = ["n,t_bpc,t_bpcf,ratio"]
    lines += [f"{r.n},{r.t_bpc!r},{r.t_bpcf!r},{r.ratio!r}" for r in rows]
    return "\n".join(lines) + "\n"


def ratio_trend(rows: Sequence[TimingRow]) -> float:
    """Spearman correlation between ``n`` and the BPC/BPCf time ratio."""
    if len(rows) < 2:
        raise ValueError("need at least two sizes")
    return float(spearmanr([r.n for r in rows], [r.ratio for r in rows]).statistic)
