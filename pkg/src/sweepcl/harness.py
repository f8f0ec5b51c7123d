"""Error metrics, convergence studies and CSV reports."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import (Grid1D, Scheme, SolverConfig, TimeStepping, Trajectory, build_grid,
                   extrema_excess, is_power_of_two_chain)
from .problems import TestProblem, get_problem
from .scalar_solver import NodeSolveError, run_scalar
from .system_solver import run_system

REPORT_FIELDS = ("I", "N", "e_l1", "eoc", "tv_max_increase", "extrema_excess", "mass_residual")


@dataclass(frozen=True)
class ErrorReport:
    I: int
    N: int
    e_l1: float
    eoc: float | None = None
    tv_max_increase: float = 0.0
    extrema_excess_max: float = 0.0
    mass_balance_residual: float = 0.0

    def __post_init__(self):
        if not self.e_l1 >= 0:
            raise ValueError("e_l1 must be nonnegative")

    def row(self) -> list:
        return [self.I, self.N, _fmt(self.e_l1), "" if self.eoc is None else _fmt(self.eoc),
                _fmt(self.tv_max_increase), _fmt(self.extrema_excess_max),
                _fmt(self.mass_balance_residual)]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def error_l1(traj: Trajectory, exact, grid: Grid1D | None = None,
             ts: TimeStepping | None = None) -> float:
    """``h*tau*sum_{n>=1} sum_i |u_i^n - u(x_i, t^n)|``, summed over components.

    Runs that rotate the periodic field back after every step are compared
    at the shifted sample points of each level.
    """
    grid = traj.grid if grid is None else grid
    ts = traj.ts if ts is None else ts
    total = 0.0
    for n in range(1, ts.N + 1):
        u = np.asarray(traj.fields[n], dtype=float)
        ref = np.asarray(exact(traj.sample_points(n), n * ts.tau), dtype=float).reshape(u.shape)
        total += float(np.abs(u - ref).sum())
    return grid.h * ts.tau * total


def eoc(e_coarse: float, e_fine: float) -> float:
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("errors must be positive to compute an order")
    return math.log2(e_coarse / e_fine)


def scheme_config(scheme: Scheme | str, cfg: SolverConfig | None = None, **kw) -> SolverConfig:
    scheme = Scheme(scheme) if not isinstance(scheme, Scheme) else scheme
    return replace(cfg or SolverConfig(), scheme=scheme, **kw)


def simulate(problem: TestProblem, grid: Grid1D, ts: TimeStepping,
             cfg: SolverConfig) -> Trajectory:
    if problem.is_system:
        return run_system(problem, grid, ts, cfg)
    return run_scalar(problem, grid, ts, cfg)


def monitors(problem: TestProblem, traj: Trajectory) -> tuple[float, float, float]:
    """(max per-step TV increase, max extrema excess, max |mass residual|)."""
    tv = np.asarray(traj.tv, dtype=float)
    tv_inc = float(np.max(np.diff(tv, axis=0))) if len(tv) > 1 else 0.0
    if problem.bounds is not None:
        lo, hi = problem.bounds
        ex = max(extrema_excess(f, lo, hi) for f in traj.fields)
    else:
        ex = 0.0
    mr = float(np.max(np.abs(np.asarray(traj.mass_residual, dtype=float)))) if traj.mass_residual else 0.0
    return tv_inc, ex, mr


def _one_resolution(args):
    problem, I, tau_ratio, t_end, cfg = args
    if isinstance(problem, str):
        problem = get_problem(problem)
    grid = build_grid(*problem.domain, I)
    ts = TimeStepping.from_ratio(grid, tau_ratio, t_end)
    try:
        traj = simulate(problem, grid, ts, cfg)
    except NodeSolveError as e:
        raise RuntimeError(f"I={I}: {e}") from e
    e = error_l1(traj, problem.exact) if problem.exact is not None else float("nan")
    return I, ts.N, e, monitors(problem, traj)


def convergence_study(problem: TestProblem | str, scheme: Scheme | str | None, I_list,
                      tau_ratio: float | None = None, cfg: SolverConfig | None = None,
                      t_end: float | None = None, workers: int | None = None) -> list[ErrorReport]:
    """One ErrorReport per resolution with the EOC against the previous row.

    Resolutions run in worker processes when ``workers > 1`` and the problem
    is given by name (problem objects hold closures and do not pickle).
    """
    I_list = [int(i) for i in I_list]
    if not I_list:
        raise ValueError("no resolutions given")
    if not is_power_of_two_chain(I_list):
        raise ValueError(f"resolutions must double from one to the next, got {I_list}")
    prob = get_problem(problem) if isinstance(problem, str) else problem
    if prob.exact is None:
        raise ValueError(f"problem {prob.name!r} has no exact solution")
    tau_ratio = prob.defaults.tau_ratio if tau_ratio is None else tau_ratio
    t_end = prob.defaults.t_end if t_end is None else t_end
    cfg = cfg or SolverConfig()
    if scheme is not None:
        cfg = scheme_config(scheme, cfg)
    jobs = [(problem if isinstance(problem, str) and workers and workers > 1 else prob,
             I, tau_ratio, t_end, cfg) for I in I_list]
    if workers and workers > 1 and isinstance(problem, str) and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            results = list(ex.map(_one_resolution, jobs))
    else:
        results = [_one_resolution(j) for j in jobs]
    reports = []
    prev = None
    for I, N, e, (tv, ex_, mr) in results:
        order = eoc(prev, e) if prev is not None else None
        reports.append(ErrorReport(I, N, e, order, tv, ex_, mr))
        prev = e
    return reports


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        for r in reports:
            w.writerow(r.row())


def write_snapshot_csv(path, x, u, u_exact=None) -> None:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    system = u.ndim == 2
    if system:
        m = u.shape[1]
        header = ["x"] + [f"q{k + 1}" for k in range(m)]
        if u_exact is not None:
            header += [f"q{k + 1}_exact" for k in range(m)]
    else:
        header = ["x", "u"] + (["u_exact"] if u_exact is not None else [])
    cols = [x[:, None], u.reshape(len(x), -1)]
    if u_exact is not None:
        cols.append(np.asarray(u_exact, dtype=float).reshape(len(x), -1))
    data = np.hstack(cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([_fmt(v) for v in row])


def nearest_level(ts: TimeStepping, t: float) -> int:
    if t < -1e-12 or t > ts.t_end + 0.5 * ts.tau:
        raise ValueError(f"time {t} outside [0, {ts.t_end}]")
    return min(ts.N, max(0, int(round(t / ts.tau))))
