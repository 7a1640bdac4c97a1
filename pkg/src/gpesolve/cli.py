"""Command-line interface.

Verbs: `solve` (single run), `multigrid` (coarse-to-fine continuation),
`bench` (benchmark suites), `analyze` (amplification-factor and
Hessian-conditioning diagnostics).  Exit codes: 0 success, 1 solver
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bench, classic, io, precond
from .config import ConfigError, RunConfig
from .runs import run_multigrid, run_single


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="configuration file (key = value lines)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a configuration key")
    parser.add_argument("--out", default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpesolve",
        description="Ground states of the rotating Gross-Pitaevskii equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a single ground-state solve")
    _add_config_args(p_solve)

    p_mg = sub.add_parser("multigrid", help="run the multigrid continuation")
    _add_config_args(p_mg)

    p_bench = sub.add_parser("bench", help="run a benchmark suite")
    p_bench.add_argument("suite", choices=list(bench.SUITES) + ["all"])
    p_bench.add_argument("--out", default=None, help="output directory")
    p_bench.add_argument("--paper-scale", action="store_true",
                         help="use the published (large) problem sizes; no runtime bound")
    p_bench.add_argument("--workers", type=int, default=1,
                         help="parallel suite workers (results are deterministic for 1)")

    p_an = sub.add_parser("analyze", help="spectral diagnostics")
    an_sub = p_an.add_subparsers(dest="analysis", required=True)
    p_amp = an_sub.add_parser("amplification", help="power-iteration rates of FE/BE/CN")
    p_amp.add_argument("--scheme", choices=["fe", "be", "cn"], default="be")
    p_amp.add_argument("--dt", type=float, default=0.1)
    p_amp.add_argument("--n", type=int, default=16, help="matrix size")
    p_amp.add_argument("--seed", type=int, default=0)
    p_amp.add_argument("--iters", type=int, default=300)
    p_cond = an_sub.add_parser("condition", help="preconditioned Hessian conditioning at the solution")
    _add_config_args(p_cond)
    p_cond.add_argument("--precond", default=None,
                        help="preconditioner to analyze (default: the configured one)")
    return parser


def _cmd_solve(args, multigrid: bool) -> int:
    cfg = RunConfig.from_file(args.config, args.overrides)
    outdir = args.out or cfg.output_dir or "gpesolve_out"
    summary = run_multigrid(cfg, outdir) if multigrid else run_single(cfg, outdir)
    for key, value in summary.items():
        print(f"{key} = {value}")
    if summary["converged"] != "true":
        print(f"solver failed: {summary['stop_reason']}", file=sys.stderr)
        return 1
    return 0


def _cmd_bench(args) -> int:
    rows = bench.run_benchmark(args.suite, paper_scale=args.paper_scale, workers=args.workers)
    outdir = args.out or "gpesolve_bench"
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, f"{args.suite}.csv")
    io.write_table_csv(path, rows, bench.TABLE_FIELDS)
    print(f"wrote {len(rows)} rows to {path}")
    for row in rows:
        print("  ".join(f"{k}={row[k]}" for k in ("suite", "method", "precond", "M", "eta",
                                                  "omega", "iters", "inner_iters", "energy")))
    return 0


def _cmd_analyze(args) -> int:
    if args.analysis == "amplification":
        rng = np.random.default_rng(args.seed)
        a = rng.standard_normal((args.n, args.n))
        h = 0.5 * (a + a.T) + args.n * np.eye(args.n) / 4.0
        report = classic.amplification_analysis(h, args.scheme, args.dt, n_iter=args.iters,
                                                seed=args.seed)
        print(f"scheme = {report.scheme}")
        print(f"dt = {report.dt}")
        print(f"predicted_rate = {report.predicted_rate}")
        print(f"observed_rate = {report.observed_rate}")
        print(f"degenerate = {report.degenerate}")
        return 0
    # conditioning of the preconditioned projected Hessian at the solution
    cfg = RunConfig.from_file(args.config, args.overrides)
    grid = cfg.grid()
    if 2 * grid.size > 8192:
        print("condition analysis needs a small grid (total unknowns <= 4096)", file=sys.stderr)
        return 2
    params = cfg.model_params()
    from .runs import initial_field, _solve_once

    result = _solve_once(cfg, grid, params, initial_field(cfg, grid, params))
    kind = args.precond or cfg.precond_kind()
    p = precond.build(kind, result.phi, params)
    report = classic.precond_hessian_condition(result.phi, params, p)
    print(f"precond = {kind}")
    print(f"sigma = {report.sigma}")
    if report.warning:
        print(f"warning = {report.warning}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args, multigrid=False)
        if args.command == "multigrid":
            return _cmd_solve(args, multigrid=True)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_analyze(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except classic.KrylovError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
