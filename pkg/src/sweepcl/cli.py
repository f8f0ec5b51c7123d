"""Command-line front end: ``python -m sweepcl <command> ...``."""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Scheme, SolverConfig, TimeStepping, build_grid, is_power_of_two_chain
from .harness import (convergence_study, nearest_level, simulate, write_report_csv,
                      write_snapshot_csv, _fmt)
from .problems import CATALOG, get_problem
from .scalar_solver import NodeSolveError

SCHEMES = [s.value for s in Scheme]


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    problem: str
    scheme: Scheme = Scheme.HIGH_RESOLUTION
    I: int | None = None
    tau_ratio: float | None = None
    courant: float | None = None
    t_end: float | None = None
    omega: float | None = None
    correctors: int = 1
    epsilon_scale: float = 1e-12
    output_dir: Path = Path(".")
    snapshot_times: list = field(default_factory=list)

    def __post_init__(self):
        if self.tau_ratio is not None and self.courant is not None:
            raise UsageError("give either --tau-ratio or --courant, not both")

    def config(self) -> SolverConfig:
        kw = dict(scheme=self.scheme, max_corrector_iters=self.correctors,
                  epsilon_scale=self.epsilon_scale)
        if self.omega is not None:
            kw["omega"] = self.omega
        elif self.scheme is Scheme.FIXED_OMEGA:
            raise UsageError("--scheme fixed-omega needs --omega")
        return SolverConfig(**kw)

    def build_problem(self):
        kw = {}
        if self.courant is not None:
            if self.problem != "balsara":
                raise UsageError("--courant is only defined for the advection problem; use --tau-ratio")
            kw["courant"] = int(self.courant) if float(self.courant).is_integer() else self.courant
        return get_problem(self.problem, **kw)

    def ratio(self, problem) -> float:
        if self.courant is not None:
            return self.courant / abs(problem.params.get("v", 1.0))
        return problem.defaults.tau_ratio if self.tau_ratio is None else self.tau_ratio


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, cells_type) -> None:
    p.add_argument("--problem", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default=Scheme.HIGH_RESOLUTION.value)
    p.add_argument("--cells", type=cells_type)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau-ratio", type=float, help="time step as a multiple of h")
    g.add_argument("--courant", type=float, help="Courant number (advection only)")
    p.add_argument("--t-end", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--correctors", type=int, default=1)
    p.add_argument("--epsilon-scale", type=float, default=1e-12)
    p.add_argument("--output-dir", type=Path)
    p.add_argument("--config", type=Path, help="flat key=value file with flag names as keys")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sweepcl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one problem and write snapshots")
    _common(run, int)
    run.add_argument("--snapshot", type=_float_list, default=None,
                     help="comma-separated output times")
    conv = sub.add_parser("convergence", help="errors and EOC over a chain of resolutions")
    _common(conv, _int_list)
    conv.add_argument("--workers", type=int, default=1)
    tab = sub.add_parser("tables", help="regenerate both Burgers convergence tables")
    tab.add_argument("--output-dir", type=Path)
    tab.add_argument("--workers", type=int, default=1)
    sub.add_parser("list-problems", help="print the problem catalog")
    return ap


def read_config(path: Path) -> dict:
    out = {}
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key=value")
        key, val = (t.strip() for t in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


EXCLUSIVE = {"tau_ratio", "courant"}


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser, argv) -> None:
    """Fill options from ``--config`` unless they were given on the command line."""
    if getattr(args, "config", None) is None:
        return
    given = {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, raw in read_config(args.config).items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if key in given or (key in EXCLUSIVE and given & EXCLUSIVE):
            continue
        act = actions[key]
        val = act.type(raw) if act.type else raw
        if act.choices and val not in act.choices:
            raise UsageError(f"config value {raw!r} not allowed for {key}")
        setattr(args, key, val)


def _output_dir(args) -> Path:
    d = args.output_dir or Path(os.environ.get("SWEEPCL_OUTPUT", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _steps(grid, ratio: float, t_end: float) -> TimeStepping:
    try:
        return TimeStepping.from_ratio(grid, ratio, t_end)
    except ValueError:
        tau = ratio * grid.h
        n = math.ceil(t_end / tau - 1e-9)
        print(f"warning: t_end={t_end:g} is not a whole number of steps of {tau:g}; "
              f"running {n} steps to t={n * tau:g}", file=sys.stderr)
        return TimeStepping(tau, n)


def _spec(args) -> RunSpec:
    return RunSpec(args.problem, Scheme(args.scheme), None, args.tau_ratio, args.courant,
                   args.t_end, args.omega, args.correctors, args.epsilon_scale,
                   _output_dir(args), getattr(args, "snapshot", None) or [])


def cmd_run(args) -> int:
    spec = _spec(args)
    problem = spec.build_problem()
    cfg = spec.config()
    I = args.cells or problem.defaults.cells[0]
    t_end = problem.defaults.t_end if spec.t_end is None else spec.t_end
    grid = build_grid(*problem.domain, I)
    ts = _steps(grid, spec.ratio(problem), t_end)
    times = spec.snapshot_times or [t_end]
    for t in times:
        if t < 0 or t > t_end + 1e-12:
            raise UsageError(f"snapshot time {t} outside [0, {t_end}]")
    traj = simulate(problem, grid, ts, cfg)
    stem = f"{problem.name}_{cfg.scheme.value}_I{I}"
    for t in times:
        n = nearest_level(ts, t)
        x = traj.sample_points(n)
        exact = (problem.exact(x, n * ts.tau) if problem.exact is not None else None)
        path = spec.output_dir / f"{stem}_t{t:g}.csv"
        write_snapshot_csv(path, grid.x, traj.fields[n], exact)
        print(path)
    path = spec.output_dir / f"{stem}_diagnostics.csv"
    write_diagnostics_csv(path, traj)
    print(path)
    return 0


def write_diagnostics_csv(path, traj) -> None:
    m = 1 if np.ndim(traj.fields[0]) == 1 else np.shape(traj.fields[0])[1]
    sfx = [""] if m == 1 else [str(k + 1) for k in range(m)]
    cols = ["tv", "min", "max", "mass", "mass_residual"]
    header = ["n", "t"] + [c + s for c in cols for s in sfx] + ["corrector_iters", "c_plus", "c_minus"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for n in range(len(traj.fields)):
            row = [n, _fmt(n * traj.ts.tau)]
            for vals in (traj.tv[n], traj.umin[n], traj.umax[n], traj.mass[n],
                         traj.mass_residual[n - 1] if n else np.zeros(m)):
                row += [_fmt(v) for v in np.atleast_1d(vals)]
            if n:
                cb = traj.courant[n - 1]
                row += [traj.corrector_iters[n - 1], _fmt(cb.c_plus), _fmt(cb.c_minus)]
            else:
                row += [0, "", ""]
            w.writerow(row)


def cmd_convergence(args) -> int:
    spec = _spec(args)
    problem = spec.build_problem()
    cells = args.cells or list(problem.defaults.cells)
    if not is_power_of_two_chain(cells) or len(set(cells)) != len(cells):
        raise UsageError(f"--cells must double from one entry to the next, got {cells}")
    cfg = spec.config()
    name = problem.name if spec.courant is None else problem
    reports = convergence_study(name, None, cells, spec.ratio(problem), cfg, spec.t_end,
                                workers=args.workers)
    path = spec.output_dir / f"{problem.name}_{cfg.scheme.value}_convergence.csv"
    write_report_csv(reports, path)
    for r in reports:
        print(f"{r.I:6d} {r.N:6d} {r.e_l1:.5f} {'-' if r.eoc is None else f'{r.eoc:.2f}'}")
    print(path)
    return 0


TABLE1 = [("first_order", SolverConfig(scheme=Scheme.FIRST_ORDER)),
          ("omega_0", SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.0)),
          ("omega_0.5", SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.5)),
          ("omega_1", SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=1.0))]
TABLE2 = [("hires", SolverConfig()), ("first_order", SolverConfig(scheme=Scheme.FIRST_ORDER))]


def _table(path, problem, columns, workers) -> None:
    p = get_problem(problem)
    cols = [(label, convergence_study(problem, None, p.defaults.cells, p.defaults.tau_ratio, cfg,
                                      workers=workers)) for label, cfg in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["I", "N"] + [h for label, _ in cols for h in (f"e_{label}", f"eoc_{label}")])
        for k, ref in enumerate(cols[0][1]):
            row = [ref.I, ref.N]
            for _, reps in cols:
                r = reps[k]
                row += [_fmt(r.e_l1), "" if r.eoc is None else _fmt(r.eoc)]
            w.writerow(row)


def cmd_tables(args) -> int:
    out = _output_dir(args)
    _table(out / "table1.csv", "burgers-smooth", TABLE1, args.workers)
    print(out / "table1.csv")
    _table(out / "table2.csv", "burgers-shock-rarefaction", TABLE2, args.workers)
    print(out / "table2.csv")
    return 0


def cmd_list_problems(args=None, stream=sys.stdout) -> int:
    for name, factory in CATALOG.items():
        p = factory()
        d = p.defaults
        print(f"{name:28s} m={p.m} domain=[{p.domain[0]:g}, {p.domain[1]:g}] "
              f"cells={','.join(map(str, d.cells))} tau/h={d.tau_ratio:g} t_end={d.t_end:g}",
              file=stream)
    return 0


COMMANDS = {"run": cmd_run, "convergence": cmd_convergence, "tables": cmd_tables,
            "list-problems": cmd_list_problems}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args, parser, argv)
        if getattr(args, "problem", None) is not None and args.problem not in CATALOG:
            print(f"error: unknown problem {args.problem!r}; available problems:", file=sys.stderr)
            cmd_list_problems(stream=sys.stderr)
            return 2
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NodeSolveError, RuntimeError, FloatingPointError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
