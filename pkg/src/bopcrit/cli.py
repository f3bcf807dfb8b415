"""``bopcrit`` command line: generate graphs, score and attack them, run the
benchmark, correlation and timing experiments.

Exit status: 0 on success, 1 on invalid input, 2 when a computation fails
(including benchmark runs with failed cells).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .attack import AttackError, AttackStrategy, run_attack, tune_parameter
from .benchmark import (
    complexity_csv,
    failures_csv,
    manifest_csv,
    matrix_csv,
    params_csv,
    population_seed,
    ratio_trend,
    resolve_measure,
    run_complexity,
    run_correlation,
    run_kind,
    tuning_grid,
)
from .config import ConfigError, ExperimentConfig, load_config
from .generators import GeneratorSpec, sample_population
from .graph import CostPolicy, read_edge_list, write_edge_list
from .linalg import DisconnectedGraphError
from .measures import TUNABLE, MeasureId, compute_scores, rank_graph
from .stats import merges_to_csv

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input, not computation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _out_dir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "paper_scale", False):
        cfg = ExperimentConfig()
    else:
        cfg = ExperimentConfig.desk_scale()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    for key in ("kinds", "measures"):
        value = getattr(args, key, None)
        if value:
            changes[key] = tuple(v.strip() for v in value.split(",") if v.strip())
    for key in ("count", "n_min", "n_max"):
        value = getattr(args, key, None)
        if value is not None:
            changes[key] = value
    return cfg.with_(**changes) if changes else cfg


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    seed = 0 if args.seed is None else args.seed
    param = args.m if args.kind == "ab" else args.p
    if args.n is not None:
        rng = np.random.default_rng(seed)
        specs = []
        for _ in range(args.count):
            graph_seed = int(rng.integers(2**31 - 1))
            if param is None:
                param_i = int(rng.integers(1, min(6, args.n - 1) + 1)) if args.kind == "ab" else float(0.5 * (1.0 - rng.random()))
            else:
                param_i = param
            specs.append(GeneratorSpec(args.kind, args.n, param_i, graph_seed))
    else:
        if param is not None:
            raise ValueError("a fixed --m/--p needs a fixed --n")
        lo, hi = args.n_min, args.n_max
        specs = [s for s, _ in sample_population(args.count, args.kind, (lo, hi), population_seed(seed, args.kind))]
    out = _out_dir(args, "graphs")
    for i, spec in enumerate(specs):
        write_edge_list(spec.build(), out / f"{spec.kind}{i:03d}.edges")
    (out / "manifest.csv").write_text(manifest_csv(specs))
    _log(f"wrote {len(specs)} graphs and manifest.csv to {out}")
    return EXIT_OK


def cmd_measure(args) -> int:
    g = read_edge_list(args.graph)
    m = resolve_measure(args.measure, ExperimentConfig.desk_scale())
    scores = compute_scores(g, m, CostPolicy(args.policy), 0 if args.seed is None else args.seed)
    ranking = rank_graph(g, scores)
    lines = ["label,score"] + [f"{g.labels[i]},{float(scores[i])!r}" for i in ranking.order]
    text = "\n".join(lines) + "\n"
    if args.out:
        out = _out_dir(args, ".")
        (out / "scores.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_attack(args) -> int:
    g = read_edge_list(args.graph)
    cfg = ExperimentConfig.desk_scale()
    m = resolve_measure(args.measure, cfg)
    strategy = AttackStrategy(args.strategy, args.budget)
    policy = CostPolicy(args.policy)
    seed = 0 if args.seed is None else args.seed
    tuned = None
    if args.grid is not None or (args.tune and m.needs_tuning):
        if m.name not in TUNABLE:
            raise ValueError(f"measure {m.name!r} has no tunable parameter")
        key = TUNABLE[m.name]
        grid = _floats(args.grid) if args.grid else list(tuning_grid(m, cfg))
        if key == "h":
            grid = [int(v) for v in grid]
        base = MeasureId(m.name, tuple((k, v) for k, v in m.params if k != key))
        value, curve = tune_parameter(g, m.name, grid, strategy, policy, seed, base)
        tuned = {"parameter": key, "value": value, "grid": grid}
    else:
        curve = run_attack(g, m, strategy, policy, seed)
    out = _out_dir(args, "attack")
    (out / "curve.csv").write_text(curve.to_csv())
    summary = curve.summary()
    summary["graph"] = str(args.graph)
    summary["n"] = g.n
    summary["seed"] = seed
    if tuned is not None:
        summary["tuned"] = tuned
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"auc={curve.auc:.6f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg.out)
    (out / "config.ini").write_text(cfg.to_ini())
    failures = []
    reports = {}
    for kind in cfg.kinds:
        done = [0]
        total = len(cfg.measures) * cfg.count

        def progress(cell, kind=kind, done=done, total=total):
            done[0] += 1
            if not args.quiet:
                status = "FAILED" if cell.error else f"{cell.auc:.4f}"
                _log(f"[{kind} {done[0]}/{total}] {cell.graph} {cell.measure}: {status}")

        result = run_kind(cfg, kind, progress)
        (out / f"manifest_{kind}.csv").write_text(manifest_csv(result.specs))
        (out / f"params_{kind}.csv").write_text(params_csv(result.cells))
        if result.table is not None:
            (out / f"auc_{kind}.csv").write_text(result.table.to_csv())
        reports[kind] = result.report(cfg.alpha)
        reports[kind]["population_seed"] = population_seed(cfg.seed, kind)
        failures.extend(result.failures)
    (out / "report.json").write_text(json.dumps(reports, indent=2) + "\n")
    for kind, rep in reports.items():
        if "borda" in rep:
            order = ", ".join(m for m, _ in rep["borda"])
            cd = rep.get("nemenyi", {}).get("critical_difference")
            print(f"{kind}: borda order {order}" + (f"; CD={cd:.4f}" if cd is not None else ""))
    if failures:
        (out / "failures.csv").write_text(failures_csv(failures))
        _log(f"{len(failures)} cells failed; see {out / 'failures.csv'}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_correlate(args) -> int:
    cfg = _config(args)
    measures = cfg.correlation_measures
    if args.measures:
        measures = tuple(v.strip() for v in args.measures.split(",") if v.strip())
    out = _out_dir(args, cfg.out)
    corr, merges = run_correlation(cfg, measures)
    (out / "correlation.csv").write_text(matrix_csv(corr, measures))
    (out / "ward.csv").write_text(merges_to_csv(merges))
    print(f"wrote correlation.csv and ward.csv to {out}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    rows = run_complexity(_ints(args.sizes), args.theta, args.p, 0 if args.seed is None else args.seed, args.repeats)
    text = complexity_csv(rows)
    if args.out:
        out = _out_dir(args, ".")
        (out / "complexity.csv").write_text(text)
    else:
        sys.stdout.write(text)
    if len(rows) >= 2:
        _log(f"spearman(n, ratio) = {ratio_trend(rows):.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master random seed (default 0)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")

    p = _Parser(prog="bopcrit", description="Bag-of-paths node criticality toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write random graphs and a manifest")
    g.add_argument("--kind", choices=("ab", "er"), required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--n", type=int, default=None, help="fixed size (otherwise drawn from --n-min..--n-max)")
    g.add_argument("--n-min", type=int, default=5)
    g.add_argument("--n-max", type=int, default=500)
    g.add_argument("--m", type=int, default=None, help="AB attachment count (1..6)")
    g.add_argument("--p", type=float, default=None, help="ER edge probability (0, 0.5]")
    g.set_defaults(func=cmd_generate)

    policy_help = "edge cost policy: reciprocal (1/a_ij) or unit"

    m = sub.add_parser("measure", parents=[common], help="score the nodes of one graph")
    m.add_argument("graph")
    m.add_argument("measure", help="e.g. ec, wk:h=2, bpc:theta=1, bl:seed=42")
    m.add_argument("--policy", choices=("reciprocal", "unit"), default="reciprocal", help=policy_help)
    m.set_defaults(func=cmd_measure)

    a = sub.add_parser("attack", parents=[common], help="simulate a node-deletion attack")
    a.add_argument("graph")
    a.add_argument("measure")
    a.add_argument("--strategy", choices=("single", "periodic"), default="single")
    a.add_argument("--budget", type=int, default=100, help="number of re-rankings for the periodic strategy")
    a.add_argument("--grid", default=None, help="comma-separated values for the measure's tunable parameter")
    a.add_argument("--tune", action="store_true", help="tune over the default grid when the parameter is unset")
    a.add_argument("--policy", choices=("reciprocal", "unit"), default="reciprocal", help=policy_help)
    a.set_defaults(func=cmd_attack)

    for name, func, text in (
        ("benchmark", cmd_benchmark, "attack benchmark over a generated population"),
        ("correlate", cmd_correlate, "Kendall correlations between measures and their Ward clustering"),
    ):
        b = sub.add_parser(name, parents=[common], help=text)
        b.add_argument("--config", default=None, help="INI experiment configuration")
        b.add_argument("--paper-scale", action="store_true", help="100 graphs per generator, n in [5, 500]")
        b.add_argument("--kinds", default=None, help="comma-separated generators (ab, er)")
        b.add_argument("--count", type=int, default=None, help="graphs per generator")
        b.add_argument("--n-min", type=int, default=None)
        b.add_argument("--n-max", type=int, default=None)
        b.add_argument("--measures", default=None, help="comma-separated measure ids")
        b.add_argument("--quiet", action="store_true")
        b.set_defaults(func=func)

    c = sub.add_parser("complexity", parents=[common], help="time BPC against BPCf on ER(n, p) graphs")
    c.add_argument("--sizes", default="100,200,300,400,500")
    c.add_argument("--theta", type=float, default=1.0)
    c.add_argument("--p", type=float, default=0.1)
    c.add_argument("--repeats", type=int, default=3)
    c.set_defaults(func=cmd_complexity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, DisconnectedGraphError, AttackError, ArithmeticError) as exc:
        _log(f"error: computation failed: {exc}")
        return EXIT_FAILED
    except (ValueError, ConfigError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
