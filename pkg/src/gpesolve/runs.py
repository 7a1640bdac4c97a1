"""Run orchestration: single solves and multigrid continuation, with all
artifacts written atomically to an output directory."""

from __future__ import annotations

import dataclasses
import os
import time

import numpy as np

from . import classic, io, model, optim, spectral
from .config import RunConfig
from .optim import SolveResult
from .spectral import Grid, WaveField


def initial_field(cfg: RunConfig, grid: Grid, params: model.ModelParams) -> WaveField:
    return model.initial_guess(cfg.init_kind(), grid, params)


def _solve_once(
    cfg: RunConfig,
    grid: Grid,
    params: model.ModelParams,
    phi0: WaveField,
    tol: float | None = None,
) -> SolveResult:
    if cfg.method in ("pg", "pcg"):
        solver_cfg = cfg.solver_config()
        if tol is not None:
            solver_cfg = dataclasses.replace(solver_cfg, tol=tol)
        return optim.solve(phi0, params, solver_cfg)
    scheme = cfg.scheme()
    return classic.run_imaginary_time(
        phi0,
        scheme,
        params,
        precond_kind=cfg.precond_kind(),
        stop=cfg.mapping["solver.stop"],
        tol=tol if tol is not None else float(cfg.mapping["solver.tol"]),
        max_iter=int(cfg.mapping["solver.max_iter"]),
    )


def _summary_dict(cfg: RunConfig, result: SolveResult, grid: Grid) -> dict:
    return {
        "method": cfg.method,
        "precond": cfg.mapping["solver.precond"],
        "d": grid.d,
        "L": grid.L,
        "M": grid.M,
        "h": grid.h,
        "eta": cfg.mapping["model.eta"],
        "omega": cfg.mapping["model.omega"],
        "init": cfg.init_kind(),
        "seed": cfg.seed,
        "converged": str(result.converged).lower(),
        "stop_reason": result.stop_reason,
        "iterations": result.iterations,
        "inner_iterations": result.inner_total,
        "energy": repr(float(result.energy)),
        "lambda": repr(float(result.lam)),
        "residual_inf": repr(float(result.r_inf)),
        "fft_count": result.fft_total,
        "wall_time": repr(result.wall_time),
    }


def run_single(cfg: RunConfig, outdir: str) -> dict:
    """Solve one configuration and write convergence CSV, field dump,
    density CSV, and a key = value summary."""
    np.random.seed(cfg.seed % 2**32)
    grid = cfg.grid()
    params = cfg.model_params()
    phi0 = initial_field(cfg, grid, params)
    result = _solve_once(cfg, grid, params, phi0)
    os.makedirs(outdir, exist_ok=True)
    inner = cfg.method not in ("pg", "pcg")
    io.write_records_csv(os.path.join(outdir, "convergence.csv"), result.records, inner_iters=inner)
    io.save_field(os.path.join(outdir, "field.gpef"), result.phi)
    io.write_density_csv(os.path.join(outdir, "density.csv"), result.phi)
    summary = _summary_dict(cfg, result, grid)
    io.write_summary(os.path.join(outdir, "summary.txt"), summary)
    return summary


def run_multigrid(cfg: RunConfig, outdir: str) -> dict:
    """Coarse-to-fine continuation: solve each level to its tolerance and
    zero-pad the result as the next level's initial guess.

    Per-level convergence CSVs carry the accumulated wall time so that
    energy-error-versus-time traces can be assembled across levels.
    """
    schedule = cfg.multigrid_schedule()
    if not schedule:
        return run_single(cfg, outdir)
    np.random.seed(cfg.seed % 2**32)
    params = cfg.model_params()
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    phi: WaveField | None = None
    level_summaries = []
    result: SolveResult | None = None
    final_grid: Grid | None = None
    for level, (level_m, eps) in enumerate(schedule):
        grid = Grid(int(cfg.mapping["grid.d"]), float(cfg.mapping["grid.L"]), level_m)
        if phi is None:
            phi0 = initial_field(cfg, grid, params)
        else:
            phi0 = spectral.spectral_interpolate(phi, grid)
        result = _solve_once(cfg, grid, params, phi0, tol=eps)
        phi = result.phi
        final_grid = grid
        elapsed = time.perf_counter() - t0
        inner = cfg.method not in ("pg", "pcg")
        io.write_records_csv(
            os.path.join(outdir, f"level{level}_M{level_m}_convergence.csv"),
            result.records, inner_iters=inner)
        level_summaries.append({
            "level": level,
            "M": level_m,
            "tol": eps,
            "iterations": result.iterations,
            "energy": result.energy,
            "converged": result.converged,
            "elapsed": elapsed,
        })
    io.save_field(os.path.join(outdir, "field.gpef"), phi)
    io.write_density_csv(os.path.join(outdir, "density.csv"), phi)
    summary = _summary_dict(cfg, result, final_grid)
    summary["levels"] = ",".join(str(m) for m, _ in schedule)
    summary["wall_time"] = repr(time.perf_counter() - t0)
    for ls in level_summaries:
        summary[f"level{ls['level']}_energy"] = repr(float(ls["energy"]))
        summary[f"level{ls['level']}_iterations"] = ls["iterations"]
    io.write_summary(os.path.join(outdir, "summary.txt"), summary)
    return summary
