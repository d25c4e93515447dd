"""Command-line surface: one subcommand per workflow.

Exit codes: 0 success, 1 usage or invalid input values, 2 patch-coverage
(assumption) violation, 3 solver failure, 4 file I/O or parse failure.
All randomness flows from --seed through named substreams, so every
subcommand is deterministic given (inputs, seed).
"""

import argparse
import json
import os
import re
import sys
import time

import numpy as np

from . import io as _io
from .completion import BmcProblem, check_assumption, complete
from .errors import (AssemblyCapExceeded, AssumptionViolated, BmcError,
                     FoldInfeasible, GradientUndefined, MaxItersExceeded,
                     NotPositiveDefinite, ParseError)
from .graph import weights_from_features
from .selection import (ImsConfig, ProbeSet, evaluate_objective, grid_search,
                        ims, _grid_values)
from .simulate import CheckerboardSpec, Method, run_comparison, summarize
from .solver import SolverConfig
from .util import SolveCounter, substream

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1 (default is 2,
    which this tool reserves for assumption violations), and tokens like
    -9:1 accepted as values of range options."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x):
    return repr(float(x))


def _parse_range(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not LO:HI (e.g. -9:1)")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not LO:HI (e.g. -9:1)")
    if not lo < hi:
        raise argparse.ArgumentTypeError("range must satisfy LO < HI")
    return lo, hi


def _parse_grid(text):
    m = re.fullmatch(r"(\d+)(?:x(\d+))?", text)
    if not m:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not N or NxM (e.g. 7x7)")
    n_r = int(m.group(1))
    n_c = int(m.group(2)) if m.group(2) else n_r
    if n_r < 2 or n_c < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2x2 points")
    return n_r, n_c


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1:
        raise argparse.ArgumentTypeError("value must be >= 1")
    return v


def _input_parent():
    par = _Parser(add_help=False)
    g = par.add_argument_group("input")
    g.add_argument("--data", required=True, metavar="PATH",
                   help="partially observed matrix file")
    g.add_argument("--data-format", choices=("csv_nan", "mm_coord"),
                   default="csv_nan",
                   help="matrix file layout (default: csv_nan)")
    row = par.add_mutually_exclusive_group(required=True)
    row.add_argument("--row-graph", metavar="PATH",
                     help="row similarity graph (MatrixMarket coordinate)")
    row.add_argument("--row-features", metavar="PATH",
                     help="row feature matrix CSV; graph is built from "
                          "exponentiated correlations plus knn sparsification")
    col = par.add_mutually_exclusive_group(required=True)
    col.add_argument("--col-graph", metavar="PATH",
                     help="column similarity graph (MatrixMarket coordinate)")
    col.add_argument("--col-features", metavar="PATH",
                     help="column feature matrix CSV (see --row-features)")
    g.add_argument("--features-header", action="store_true",
                   help="feature CSVs carry a header row to skip")
    g.add_argument("--knn", type=_positive_int, default=5, metavar="K",
                   help="neighbors kept per vertex when building graphs "
                        "from features (default: 5)")
    return par


def _solver_parent():
    par = _Parser(add_help=False)
    g = par.add_argument_group("solver")
    g.add_argument("--solver", choices=("auto", "direct", "pcg"),
                   default="auto", help="linear solver (default: auto)")
    g.add_argument("--cg-tol", type=float, default=1e-8, metavar="TOL",
                   help="relative residual target for pcg (default: 1e-8)")
    g.add_argument("--cg-max-iters", type=int, default=0, metavar="N",
                   help="pcg iteration cap; 0 picks a size-based default")
    g.add_argument("--ic-drop-tol", type=float, default=0.0, metavar="TOL",
                   help="incomplete-factor drop tolerance (default: 0)")
    return par


def _threads_parent():
    par = _Parser(add_help=False)
    par.add_argument("--threads", type=_positive_int, default=None,
                     metavar="N",
                     help="worker process cap; default is the BMC_THREADS "
                          "env var, else all available cores")
    return par


def _seed_parent():
    par = _Parser(add_help=False)
    par.add_argument("--seed", type=int, default=0, metavar="N",
                     help="master seed; probes, masks, and folds draw from "
                          "named substreams (default: 0)")
    return par


def build_parser():
    parser = _Parser(prog="bmc",
                     description="Matrix completion under row/column graph "
                                 "smoothing, with penalty selection.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")
    inp, slv = _input_parent(), _solver_parent()
    thr, seed = _threads_parent(), _seed_parent()

    p = sub.add_parser("check", parents=[inp],
                       help="verify every bicluster patch has an observation",
                       description="Report whether every patch (row component"
                                   " x column component) contains at least "
                                   "one observed entry; exit 2 if not.")
    p.add_argument("--report", metavar="PATH", help="write a JSON report")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("complete", parents=[inp, slv],
                       help="estimate the matrix at fixed penalties",
                       description="Solve the penalized least-squares system "
                                   "at the given penalties and write the "
                                   "completed matrix as CSV.")
    p.add_argument("--gamma-r", type=float, required=True, metavar="G",
                   help="row-graph penalty (> 0)")
    p.add_argument("--gamma-c", type=float, required=True, metavar="G",
                   help="column-graph penalty (> 0)")
    p.add_argument("--output", required=True, metavar="PATH",
                   help="completed matrix CSV destination")
    p.add_argument("--report", metavar="PATH", help="write a JSON report")
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("select", parents=[inp, slv, seed, thr],
                       help="choose penalties by BIC descent, BIC grid, or "
                            "cross-validated grid",
                       description="Select (gamma_r, gamma_c), print a JSON "
                                   "report, and optionally write the report, "
                                   "iterate trace, and completed matrix.")
    p.add_argument("--method", choices=("ims", "grid-bic", "grid-cv"),
                   required=True, help="selection strategy")
    p.add_argument("--mode", choices=("exact", "hutchinson"), default="exact",
                   help="degrees-of-freedom evaluation inside ims "
                        "(default: exact)")
    p.add_argument("--probes", type=_positive_int, default=5, metavar="N",
                   help="randomized-trace probe count (default: 5)")
    p.add_argument("--grid", type=_parse_grid, default=(50, 50), metavar="NxM",
                   help="grid resolution for grid methods (default: 50x50)")
    p.add_argument("--range", type=_parse_range, default=(-9.0, 1.0),
                   metavar="LO:HI", dest="exp_range",
                   help="log-penalty exponent range (default: -9:1)")
    p.add_argument("--folds", type=_positive_int, default=5, metavar="K",
                   help="cross-validation folds for grid-cv (default: 5)")
    p.add_argument("--init-gamma-r", type=float, default=1.0, metavar="G",
                   help="ims starting row penalty (default: 1)")
    p.add_argument("--init-gamma-c", type=float, default=1.0, metavar="G",
                   help="ims starting column penalty (default: 1)")
    p.add_argument("--max-iters", type=_positive_int, default=200, metavar="N",
                   help="ims iteration cap (default: 200)")
    p.add_argument("--grad-tol", type=float, default=1e-5, metavar="TOL",
                   help="ims gradient stopping tolerance (default: 1e-5)")
    p.add_argument("--report", metavar="PATH", help="write the JSON report")
    p.add_argument("--trace", metavar="PATH",
                   help="write the iterate trace CSV (ims only)")
    p.add_argument("--output", metavar="PATH",
                   help="also write the completed matrix at the selection")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("weights", parents=[],
                       help="build a knn similarity graph from features",
                       description="Build a similarity graph from a feature "
                                   "matrix (exponentiated correlations, knn "
                                   "sparsified) and write it as a "
                                   "MatrixMarket coordinate file.")
    p.add_argument("--features", required=True, metavar="PATH",
                   help="feature matrix CSV, one entity per row")
    p.add_argument("--features-header", action="store_true",
                   help="feature CSV carries a header row to skip")
    p.add_argument("--knn", type=_positive_int, default=5, metavar="K",
                   help="neighbors kept per vertex (default: 5)")
    p.add_argument("--output", required=True, metavar="PATH",
                   help="graph file destination")
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("simulate", parents=[seed, thr],
                       help="run a benchmark described by a JSON experiment "
                            "file",
                       description="Generate block-constant data per the "
                                   "experiment file, run each listed method "
                                   "on identical replicates, and write one "
                                   "results row per method x replicate.")
    p.add_argument("--experiment", required=True, metavar="PATH",
                   help="JSON experiment description (row_blocks, col_blocks,"
                        " means, noise_sd, missing_fraction, methods, "
                        "replicates, exponent_range)")
    p.add_argument("--output", required=True, metavar="PATH",
                   help="results CSV destination")
    p.add_argument("--summary", metavar="PATH",
                   help="write a JSON summary (per-method means and sds)")
    p.add_argument("--trace-dir", metavar="DIR",
                   help="dump per-replicate iterate traces for descent "
                        "methods into this directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("df", parents=[inp, slv, seed],
                       help="degrees of freedom at fixed penalties",
                       description="Print tr(S^-1) at the given penalties, "
                                   "computed exactly or by randomized trace "
                                   "estimation.")
    p.add_argument("--gamma-r", type=float, required=True, metavar="G",
                   help="row-graph penalty (> 0)")
    p.add_argument("--gamma-c", type=float, required=True, metavar="G",
                   help="column-graph penalty (> 0)")
    p.add_argument("--mode", choices=("exact", "hutchinson"),
                   default="exact", help="trace computation (default: exact)")
    p.add_argument("--probes", type=_positive_int, default=5, metavar="N",
                   help="probe count for hutchinson mode (default: 5)")
    p.set_defaults(func=_cmd_df)

    p = sub.add_parser("surface", parents=[inp, slv, seed, thr],
                       help="tabulate the selection objective over a penalty "
                            "grid",
                       description="Evaluate the selection objective at every"
                                   " point of a log-spaced penalty grid and "
                                   "write a plot-ready CSV.")
    p.add_argument("--grid", type=_parse_grid, default=(50, 50), metavar="NxM",
                   help="grid resolution (default: 50x50)")
    p.add_argument("--range", type=_parse_range, default=(-9.0, 1.0),
                   metavar="LO:HI", dest="exp_range",
                   help="log-penalty exponent range (default: -9:1)")
    p.add_argument("--objective",
                   choices=("bic-exact", "bic-hutchinson", "cv"),
                   default="bic-exact",
                   help="surface to tabulate (default: bic-exact)")
    p.add_argument("--probes", type=_positive_int, default=5, metavar="N",
                   help="probe count for bic-hutchinson (default: 5)")
    p.add_argument("--folds", type=_positive_int, default=5, metavar="K",
                   help="folds for the cv objective (default: 5)")
    p.add_argument("--output", required=True, metavar="PATH",
                   help="surface CSV destination")
    p.set_defaults(func=_cmd_surface)

    return parser


def _resolve_threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("BMC_THREADS", "").strip()
    if env:
        try:
            v = int(env)
            if v < 1:
                raise ValueError
        except ValueError:
            raise ValueError(f"BMC_THREADS={env!r} is not a positive integer")
        return v
    return os.cpu_count() or 1


def _load_graph(args, side):
    path = getattr(args, f"{side}_graph")
    if path is not None:
        return _io.read_graph(path)
    feats = _io.read_features(getattr(args, f"{side}_features"),
                              has_header=args.features_header)
    return weights_from_features(feats, args.knn)


def _load_problem(args):
    data = _io.read_observed_matrix(args.data, args.data_format)
    return BmcProblem(data, _load_graph(args, "row"), _load_graph(args, "col"))


def _solver_config(args):
    return SolverConfig(method=args.solver, cg_rel_tol=args.cg_tol,
                        cg_max_iters=args.cg_max_iters,
                        ic_drop_tol=args.ic_drop_tol)


def _cmd_check(args):
    p = _load_problem(args)
    chk = check_assumption(p)
    R, C = chk.patch_counts.shape
    if args.report:
        _io.write_report(args.report, {
            "command": "check",
            "holds": chk.holds,
            "row_components": R,
            "col_components": C,
            "first_violation": list(chk.first_violation)
            if chk.first_violation else None,
            "observed_per_patch": chk.patch_counts.tolist(),
        })
    if chk.holds:
        print(f"assumption holds: all {R * C} patches "
              f"({R} row x {C} column components) contain observations")
        return 0
    r, c = chk.first_violation
    print(f"assumption violated: patch ({r}, {c}) has no observed entries",
          file=sys.stderr)
    return 2


def _cmd_complete(args):
    t0 = time.perf_counter()
    p = _load_problem(args)
    fit = complete(p, (args.gamma_r, args.gamma_c), _solver_config(args))
    _io.write_matrix_csv(args.output, fit.estimate)
    if args.report:
        _io.write_report(args.report, {
            "command": "complete",
            "gamma_r": args.gamma_r,
            "gamma_c": args.gamma_c,
            "solver_method": fit.report.method,
            "solver_iterations": fit.report.iterations,
            "relative_residual": fit.report.relative_residual,
            "wall_seconds": time.perf_counter() - t0,
        })
    print(f"wrote {args.output}")
    return 0


def _select_run(args, p, solver_cfg):
    """Run the chosen strategy; returns (params, report fields)."""
    if args.method == "ims":
        cfg = ImsConfig(max_iters=args.max_iters, grad_tol=args.grad_tol,
                        n_probes=args.probes)
        with SolveCounter() as counter:
            params, trace = ims(p, (args.init_gamma_r, args.init_gamma_c),
                                mode=args.mode, cfg=cfg, seed=args.seed,
                                solver_cfg=solver_cfg)
        fields = {
            "mode": args.mode,
            "status": trace.status,
            "iterates": len(trace.iterates),
            "n_evaluations": trace.n_evaluations,
            "objective_value": trace.iterates[-1].bic,
        }
        if args.mode == "hutchinson":
            fields["probes"] = args.probes
        return params, fields, counter.count, trace
    n_r, n_c = args.grid
    objective = "bic_exact" if args.method == "grid-bic" else "cv"
    with SolveCounter() as counter:
        params, surface = grid_search(
            p, objective, n_r, n_c, exponent_range=args.exp_range,
            cfg=solver_cfg, seed=args.seed, folds=args.folds,
            threads=_resolve_threads(args))
    fields = {
        "status": "completed",
        "grid": [n_r, n_c],
        "n_evaluations": n_r * n_c,
        "objective_value": float(np.min(surface)),
    }
    if args.method == "grid-cv":
        fields["folds"] = args.folds
    return params, fields, counter.count, None


def _cmd_select(args):
    if args.trace and args.method != "ims":
        raise ValueError("--trace applies only to --method ims")
    t0 = time.perf_counter()
    p = _load_problem(args)
    solver_cfg = _solver_config(args)
    params, fields, selection_solves, trace = _select_run(args, p, solver_cfg)
    final = evaluate_objective(p, params, mode="exact")
    report = {
        "schema": _io.REPORT_SCHEMA,
        "command": "select",
        "method": args.method,
        "seed": args.seed,
        "gamma_r": params.gamma_r,
        "gamma_c": params.gamma_c,
        "bic": final.bic,
        "df": final.df,
        "rss": final.rss,
        "selection_solves": selection_solves,
        "wall_seconds": time.perf_counter() - t0,
    }
    report.update(fields)
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.report:
        _io.write_report(args.report, report)
    if args.trace and trace is not None:
        _io.trace_to_csv(args.trace, trace)
    if args.output:
        _io.write_matrix_csv(args.output,
                             complete(p, params, solver_cfg).estimate)
    return 0


def _cmd_weights(args):
    feats = _io.read_features(args.features, has_header=args.features_header)
    g = weights_from_features(feats, args.knn)
    _io.write_graph(args.output, g)
    print(f"wrote {args.output}: {g.n_vertices} vertices, {g.n_edges} edges")
    return 0


def _experiment_from_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg)
    if not isinstance(raw, dict):
        raise ParseError(path, 1, "experiment file must hold a JSON object")
    for key in ("row_blocks", "col_blocks", "means"):
        if key not in raw:
            raise ParseError(path, 1, f"missing required key {key!r}")
    try:
        spec = CheckerboardSpec(
            row_blocks=raw["row_blocks"], col_blocks=raw["col_blocks"],
            means=raw["means"], noise_sd=raw.get("noise_sd", 1.0),
            missing_fraction=raw.get("missing_fraction", 0.1),
            cross_weight=raw.get("cross_weight", 0.001))
        methods = [Method.parse(m) for m in raw.get("methods", ["ims_exact"])]
        replicates = int(raw.get("replicates", 1))
        exp_range = tuple(raw.get("exponent_range", (-9.0, 1.0)))
        if replicates < 1:
            raise ValueError("replicates must be >= 1")
        if len(exp_range) != 2:
            raise ValueError("exponent_range must be [lo, hi]")
    except (TypeError, ValueError) as exc:
        raise ParseError(path, 1, str(exc))
    return spec, methods, replicates, exp_range


def _cmd_simulate(args):
    spec, methods, replicates, exp_range = _experiment_from_json(
        args.experiment)
    results = run_comparison(spec, methods, replicates,
                             master_seed=args.seed,
                             exponent_range=exp_range,
                             threads=_resolve_threads(args),
                             trace_dir=args.trace_dir)
    _io.results_to_csv(args.output, results)
    if args.summary:
        _io.write_report(args.summary, {
            "command": "simulate",
            "seed": args.seed,
            "replicates": replicates,
            "methods": summarize(results),
        })
    print(f"wrote {args.output}: {len(results)} rows")
    return 0


def _cmd_df(args):
    p = _load_problem(args)
    probes = None
    if args.mode == "hutchinson":
        probes = ProbeSet.draw(p.n * p.p, args.probes,
                               substream(args.seed, "probes"))
    ev = evaluate_objective(p, (args.gamma_r, args.gamma_c), mode=args.mode,
                            probes=probes, cfg=_solver_config(args))
    print(_fmt(ev.df))
    return 0


def _cmd_surface(args):
    p = _load_problem(args)
    n_r, n_c = args.grid
    objective = args.objective.replace("-", "_")
    probes = None
    if objective == "bic_hutchinson":
        probes = ProbeSet.draw(p.n * p.p, args.probes,
                               substream(args.seed, "probes"))
    params, surface = grid_search(
        p, objective, n_r, n_c, exponent_range=args.exp_range,
        cfg=_solver_config(args), probes=probes, seed=args.seed,
        folds=args.folds, threads=_resolve_threads(args))
    _io.surface_to_csv(args.output, _grid_values(n_r, args.exp_range),
                       _grid_values(n_c, args.exp_range), surface)
    print(f"wrote {args.output}: minimum at gamma_r={params.gamma_r!r}, "
          f"gamma_c={params.gamma_c!r}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AssumptionViolated as exc:
        print(f"bmc: assumption violated: {exc}", file=sys.stderr)
        return 2
    except FoldInfeasible as exc:
        print(f"bmc: {exc}", file=sys.stderr)
        return 2
    except (NotPositiveDefinite, MaxItersExceeded, GradientUndefined,
            AssemblyCapExceeded) as exc:
        print(f"bmc: solver failure: {exc}", file=sys.stderr)
        return 3
    except (ParseError, OSError) as exc:
        print(f"bmc: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"bmc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
