"""Two-sweep implicit time stepping for scalar conservation laws.

One time step solves the forward sweep for ``f+`` (nodes in increasing order)
followed by the backward sweep for ``f-`` (decreasing order). Every node
equation has the single unknown ``u_i`` because all other values entering the
numerical flux are either level-n values or already finalised new values:

    u_i + (tau/h) F_{i+1/2}(u_i) = u_i^old + (tau/h) F_{i-1/2}

    F_{i+1/2}(u) = g(u) - l/2 * ((1 - w) (g(u) - g(u_{i+1}^old))
                                 + w (g(u_{i-1}^new) - g(u_i^old)))

with ``g = f+``. The backward sweep is the same computation on the mirrored
grid with ``g = -f-``. ``(w, l) = (0, 0)`` is the first-order upwind flux,
fixed ``w`` with ``l = 1`` the compact second-order flux, and the
high-resolution scheme picks ``(w, l)`` per node by a predictor-corrector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryPolicy, Side
from .core import (CourantBounds, Grid1D, Scheme, SolverConfig, TimeStepping,
                   Trajectory, check_finite)
from .flux import FluxSplitting
from .limiter import LimiterParams, limiter_params

DEFAULT_CONFIG = SolverConfig()


class NodeSolveError(RuntimeError):
    def __init__(self, msg: str, node: int | None = None, step: int | None = None):
        self.node = node
        self.step = step
        super().__init__(msg)

    def located(self, node=None, step=None) -> "NodeSolveError":
        if node is not None:
            self.node = node
        if step is not None:
            self.step = step
        where = []
        if self.step is not None:
            where.append(f"step {self.step}")
        if self.node is not None:
            where.append(f"node {self.node}")
        self.args = (f"{self.args[0].split(' [')[0]} [{', '.join(where)}]",)
        return self


class NoBracket(NodeSolveError):
    pass


class NoConvergence(NodeSolveError):
    pass


def _numeric_derivative(g):
    def dg(u):
        d = 1e-7 * max(1.0, abs(u))
        return (g(u + d) - g(u - d)) / (2 * d)
    return dg


def solve_node_scalar(coef: float, g, rhs: float, cfg: SolverConfig = DEFAULT_CONFIG,
                      *, dg=None, x0: float | None = None) -> float:
    """Solve ``u + coef*g(u) = rhs`` for nondecreasing ``g`` and ``coef >= 0``.

    Newton steps from ``x0`` (default ``rhs``), safeguarded by bisection on a
    sign-changing bracket grown geometrically around the start value.
    """
    if coef < 0:
        raise ValueError("coef must be nonnegative")
    if coef == 0.0:
        return float(rhs)
    if dg is None:
        dg = _numeric_derivative(g)
    x = float(rhs if x0 is None else x0)

    def phi(u):
        return u + coef * g(u) - rhs

    def tol_at(u, gu):
        # the residual cannot be resolved below round-off of its terms
        return max(cfg.root_abs_tol, 4e-16 * (abs(u) + abs(coef * gu) + abs(rhs)))

    gx = g(x)
    p = x + coef * gx - rhs
    if abs(p) <= tol_at(x, gx):
        return x

    step = abs(p)
    if p > 0:
        hi, lo = x, x - step
        for _ in range(60):
            if phi(lo) < 0:
                break
            step *= 2.0
            lo = x - step
        else:
            raise NoBracket(f"no bracket below {x} (is the splitting monotone?)")
    else:
        lo, hi = x, x + step
        for _ in range(60):
            if phi(hi) > 0:
                break
            step *= 2.0
            hi = x + step
        else:
            raise NoBracket(f"no bracket above {x} (is the splitting monotone?)")

    for _ in range(cfg.root_max_iters):
        d = 1.0 + coef * dg(x)
        xn = x - p / d if d > 0 else lo - 1.0
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        x = xn
        gx = g(x)
        p = x + coef * gx - rhs
        if abs(p) <= tol_at(x, gx):
            return x
        if p > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            return x
    raise NoConvergence(f"node solve did not converge in {cfg.root_max_iters} iterations "
                        f"(residual {p:.3e})")


def local_courant(u_new_k: float, u_old: float, s: FluxSplitting, direction: str = "forward") -> float:
    """Divided difference of the split flux between the estimate and the old value.

    For the backward sweep the slope of ``-f-`` is returned. The caller
    multiplies by ``tau/h`` and floors at 1.
    """
    if direction == "forward":
        g, dg = s.f_plus, s.df_plus
    else:
        g, dg = (lambda u: -s.f_minus(u)), (lambda u: -s.df_minus(u))
    if u_new_k != u_old:
        return (g(u_new_k) - g(u_old)) / (u_new_k - u_old)
    return dg(u_new_k)


@dataclass
class SweepRecord:
    """Per-sweep bookkeeping in original (unmirrored) node numbering."""

    direction: str
    lo: int
    hi: int
    omega: np.ndarray
    l: np.ndarray
    psi: np.ndarray
    iters: np.ndarray
    faces: np.ndarray  # forward: F+_{i+1/2} at [i]; backward: F-_{i-1/2} at [i]
    scheme: Scheme = Scheme.FIRST_ORDER
    inflow_flux: float = 0.0  # boundary face flux in the sweep's own orientation
    skipped: bool = False


@dataclass
class SweepWorkspace:
    u_old: np.ndarray
    u_half: np.ndarray
    u_new: np.ndarray
    face_flux_plus: np.ndarray = None
    face_flux_minus: np.ndarray = None
    lim: dict = field(default_factory=dict)

    @classmethod
    def start(cls, u_old: np.ndarray, bc: BoundaryPolicy, grid: Grid1D, t_new: float):
        u_old = np.array(u_old, dtype=float)
        u_half = u_old.copy()
        bc.apply_dirichlet(u_half, grid.x, t_new)
        n = len(u_old)
        return cls(u_old, u_half, u_half.copy(), np.full(n, np.nan), np.full(n, np.nan))


def _oriented(s: FluxSplitting, direction: str):
    if direction == "forward":
        return s.f_plus, s.df_plus
    f_minus, df_minus = s.f_minus, s.df_minus
    return (lambda u: -f_minus(u)), (lambda u: -df_minus(u))


def _frozen_coeffs(w, l, gp, d_up):
    """``F(u) = a*g(u) + b`` for frozen weights."""
    return 1.0 - 0.5 * l * (1.0 - w), 0.5 * l * ((1.0 - w) * gp - w * d_up)


def _hires_params(d_up, d_dw, C, nb, eps, cfg):
    if abs(d_dw) <= eps:
        return 0.0, 1.0, 1.0
    p = limiter_params(d_up / d_dw, C, nb, eps, cfg.limiter)
    return p.omega, p.l, p.psi


def _boundary_face(scheme, omega, g, old, new, gold, lo, ghost_new, C, eps, cfg):
    """Flux through the inflow face ``lo-1/2`` and the ``l*psi`` seed for the chain.

    With a prescribed ghost value the boundary node uses the scheme's own
    weights (its limiter inputs are all known); otherwise the ``w=0, l=1``
    flux, which needs no value outside the grid.
    """
    gb = g(new[lo - 1])
    if scheme is Scheme.FIRST_ORDER:
        return gb, 1.0
    if ghost_new is None:
        return 0.5 * (gb + gold[lo]), 1.0
    d_up = g(ghost_new) - g(old[lo - 1])
    if scheme is Scheme.FIXED_OMEGA:
        w, l, psi = omega, 1.0, 1.0
    elif abs(d_up) <= eps:
        w, l, psi = 1.0, 1.0, 1.0
    else:
        w, l, psi = _hires_params(d_up, gb - gold[lo], C, 1.0, eps, cfg)
    a, b = _frozen_coeffs(w, l, gold[lo], d_up)
    return a * gb + b, l * psi


def _sweep_kernel(old, new, g, dg, lo, hi, lam, scheme, omega, C, eps, cfg, local_c,
                  ghost_new=None):
    """Forward-oriented sweep over nodes ``lo..hi``; ``old`` carries a ghost at the end.

    Updates ``new`` in place and returns per-node lists (faces, w, l, psi, iters).
    """
    n = len(new)
    faces = [math.nan] * n
    ws = [math.nan] * n
    ls = [math.nan] * n
    psis = [math.nan] * n
    its = [0] * n
    gold = [g(v) for v in old]
    stop_tol = cfg.corrector_stop_tol
    hires = scheme is Scheme.HIGH_RESOLUTION

    Fm, nb = _boundary_face(scheme, omega, g, old, new, gold, lo, ghost_new, C, eps, cfg)
    faces[lo - 1] = Fm
    for i in range(lo, hi + 1):
        ui = old[i]
        gp = gold[i + 1]
        base = ui + lam * Fm
        d_up = 0.0 if scheme is Scheme.FIRST_ORDER else g(new[i - 1]) - gold[i]
        u = None
        try:
            if scheme is Scheme.FIRST_ORDER:
                w, l, psi = 0.0, 0.0, 1.0
            elif scheme is Scheme.FIXED_OMEGA:
                w, l, psi = omega, 1.0, math.nan
            elif abs(d_up) <= eps:
                # flat upwind data: fully upwinded weight, correction is O(eps)
                w, l = 1.0, 1.0
            else:
                # predictor with central weight, then correctors with frozen (w, l)
                a, b = _frozen_coeffs(0.0, 1.0, gp, d_up)
                uk = solve_node_scalar(lam * a, g, base - lam * b, cfg, dg=dg, x0=ui)
                w, l, psi = 0.0, 1.0, 1.0
                for _ in range(cfg.max_corrector_iters):
                    Ck = C if local_c is None else local_c(uk, ui)
                    w, l, psi = _hires_params(d_up, g(uk) - gp, Ck, nb, eps, cfg)
                    a, b = _frozen_coeffs(w, l, gp, d_up)
                    u = solve_node_scalar(lam * a, g, base - lam * b, cfg, dg=dg, x0=uk)
                    its[i] += 1
                    done = abs(u - uk) < stop_tol
                    uk = u
                    if done:
                        break
                u = uk
            a, b = _frozen_coeffs(w, l, gp, d_up)
            if u is None:
                u = solve_node_scalar(lam * a, g, base - lam * b, cfg, dg=dg, x0=ui)
        except NodeSolveError as e:
            raise e.located(node=i)
        gu = g(u)
        if hires and abs(d_up) <= eps:
            d_dw = gu - gp
            psi = d_up / d_dw if abs(d_dw) > eps else 1.0
        nb = l * psi
        Fm = a * gu + b
        new[i] = u
        faces[i] = Fm
        ws[i], ls[i], psis[i] = w, l, psi
    return faces, ws, ls, psis, its


def _extend_ghost(old: np.ndarray) -> list:
    ghost = 2.0 * old[-1] - old[-2]
    return list(map(float, old)) + [float(ghost)]


def sweep(direction: str, ws: SweepWorkspace, s: FluxSplitting, grid: Grid1D, dt: float,
          cfg: SolverConfig, bc: BoundaryPolicy, cb: CourantBounds | None = None,
          eps: float = 0.0, t_new: float | None = None) -> SweepRecord:
    """Run one sweep in place on the workspace (forward: u_old -> u_half, backward: u_half -> u_new)."""
    I = grid.I
    lam = dt / grid.h
    g, dg = _oriented(s, direction)
    if direction == "forward":
        old, target = ws.u_old, ws.u_half
        sl = slice(None)
    else:
        ws.u_new = ws.u_half.copy()
        old, target = ws.u_half, ws.u_new
        sl = slice(None, None, -1)
    lo, hi = bc.solved_range(I, direction)
    old_o = old[sl]
    new_o = list(map(float, target[sl]))

    n = I + 1
    if not np.any(np.asarray(g(old_o)) != 0.0) and g(new_o[lo - 1]) == 0.0:
        # zero split flux everywhere: every node equation is solved by its old value
        rec = SweepRecord(direction, lo, hi, np.zeros(n), np.zeros(n), np.ones(n),
                          np.zeros(n, dtype=int), np.zeros(n), cfg.scheme, skipped=True)
        _store_faces(ws, rec)
        return rec

    if cb is None:
        cb = CourantBounds()
    C = cb.effective(direction)
    local_c = None
    if cfg.use_local_courant:
        def local_c(uk, un):
            if uk != un:
                slope = (g(uk) - g(un)) / (uk - un)
            else:
                slope = dg(uk)
            return max(1.0, lam * slope)

    ghost = None
    if t_new is not None and bc.sides(direction)[0] is Side.DIRICHLET:
        xg = grid.x_lo - grid.h if direction == "forward" else grid.x_hi + grid.h
        ghost = float(bc.values(xg, t_new))

    faces, w, l, psi, its = _sweep_kernel(_extend_ghost(old_o), new_o, g, dg, lo, hi, lam,
                                          cfg.scheme, cfg.omega, C, eps, cfg, local_c, ghost)
    inflow = faces[lo - 1]
    new_arr = np.array(new_o)
    target[:] = new_arr[sl]
    faces = np.array(faces)
    if direction == "backward":
        faces = -faces
    rec = SweepRecord(direction, lo, hi, np.array(w)[sl], np.array(l)[sl], np.array(psi)[sl],
                      np.array(its)[sl], faces[sl], cfg.scheme, inflow)
    _store_faces(ws, rec)
    return rec


def _store_faces(ws: SweepWorkspace, rec: SweepRecord) -> None:
    if rec.direction == "forward":
        ws.face_flux_plus = rec.faces
    else:
        ws.face_flux_minus = rec.faces
    ws.lim[rec.direction] = rec


def first_order_sweep_forward(ws, s, grid, dt, bc, cfg: SolverConfig = DEFAULT_CONFIG):
    cfg = _with_scheme(cfg, Scheme.FIRST_ORDER)
    return sweep("forward", ws, s, grid, dt, cfg, bc)


def first_order_sweep_backward(ws, s, grid, dt, bc, cfg: SolverConfig = DEFAULT_CONFIG):
    cfg = _with_scheme(cfg, Scheme.FIRST_ORDER)
    return sweep("backward", ws, s, grid, dt, cfg, bc)


def fixed_omega_step(ws, s, grid, dt, omega, bc, cfg: SolverConfig = DEFAULT_CONFIG):
    cfg = _with_scheme(cfg, Scheme.FIXED_OMEGA, omega=omega)
    recs = [sweep("forward", ws, s, grid, dt, cfg, bc)]
    recs.append(sweep("backward", ws, s, grid, dt, cfg, bc))
    return recs


def hires_sweep(direction, ws, s, grid, dt, cb, cfg, bc, eps: float | None = None):
    cfg = _with_scheme(cfg, Scheme.HIGH_RESOLUTION)
    if eps is None:
        eps = cfg.threshold(_flux_scale(s, ws.u_old))
    return sweep(direction, ws, s, grid, dt, cfg, bc, cb, eps)


def _with_scheme(cfg: SolverConfig, scheme: Scheme, **kw) -> SolverConfig:
    from dataclasses import replace
    if cfg.scheme is scheme and not kw:
        return cfg
    return replace(cfg, scheme=scheme, **kw)


def _flux_scale(s: FluxSplitting, u: np.ndarray) -> float:
    return float(max(np.max(np.abs(s.f_plus(u))), np.max(np.abs(s.f_minus(u)))))


def courant_bounds(s: FluxSplitting, u: np.ndarray, lam: float) -> CourantBounds:
    dp = np.broadcast_to(np.asarray(s.df_plus(u), dtype=float), u.shape)
    dm = np.broadcast_to(np.asarray(s.df_minus(u), dtype=float), u.shape)
    return CourantBounds(max(0.0, lam * float(dp.max())), max(0.0, -lam * float(dm.min())))


def assemble_face_fluxes(rec: SweepRecord, u_in: np.ndarray, u_out: np.ndarray,
                         s: FluxSplitting, grid: Grid1D) -> np.ndarray:
    """Recompute a sweep's face fluxes from the stored weights and the two levels.

    Returns the fluxes in the sweep's own orientation (index ``lo-1..hi``),
    independent of the values the sweep cached while solving.
    """
    g, _ = _oriented(s, rec.direction)
    sl = slice(None) if rec.direction == "forward" else slice(None, None, -1)
    old = np.array(_extend_ghost(np.asarray(u_in)[sl]))
    new = np.asarray(u_out, dtype=float)[sl]
    w = rec.omega[sl]
    l = rec.l[sl]
    lo, hi = rec.lo, rec.hi
    i = np.arange(lo, hi + 1)
    gn = g(new[i])
    F = np.empty(hi - lo + 2)
    F[0] = rec.inflow_flux
    F[1:] = gn - 0.5 * l[i] * ((1 - w[i]) * (gn - g(old[i + 1])) + w[i] * (g(new[i - 1]) - g(old[i])))
    return F


def sweep_conservation_residual(rec: SweepRecord, u_in, u_out, s, grid, dt) -> float:
    """``h*sum(u_out - u_in) + dt*(F_out - F_in)`` over the nodes the sweep solved."""
    if rec.skipped:
        return 0.0
    F = assemble_face_fluxes(rec, u_in, u_out, s, grid)
    sl = slice(None) if rec.direction == "forward" else slice(None, None, -1)
    du = (np.asarray(u_out, dtype=float) - np.asarray(u_in, dtype=float))[sl][rec.lo:rec.hi + 1]
    return float(grid.h * du.sum() + dt * (F[-1] - F[0]))


@dataclass
class StepInfo:
    workspace: SweepWorkspace
    records: list
    courant: CourantBounds
    eps: float
    mass_residual: float
    corrector_iters: int


def step_scalar(u: np.ndarray, s: FluxSplitting, grid: Grid1D, tau: float, cfg: SolverConfig,
                bc: BoundaryPolicy, t_new: float) -> tuple[np.ndarray, StepInfo]:
    lam = tau / grid.h
    ws = SweepWorkspace.start(u, bc, grid, t_new)
    eps = cfg.threshold(_flux_scale(s, ws.u_old))
    cb_f = courant_bounds(s, ws.u_old, lam)
    rec_f = sweep("forward", ws, s, grid, tau, cfg, bc, cb_f, eps, t_new)
    cb_b = courant_bounds(s, ws.u_half, lam)
    rec_b = sweep("backward", ws, s, grid, tau, cfg, bc, cb_b, eps, t_new)
    residual = (sweep_conservation_residual(rec_f, ws.u_old, ws.u_half, s, grid, tau)
                + sweep_conservation_residual(rec_b, ws.u_half, ws.u_new, s, grid, tau))
    u_next = bc.rotate(ws.u_new)
    info = StepInfo(ws, [rec_f, rec_b], CourantBounds(cb_f.c_plus, cb_b.c_minus), eps, residual,
                    int(rec_f.iters.sum() + rec_b.iters.sum()))
    return u_next, info


def run_scalar(problem, grid: Grid1D, ts: TimeStepping, cfg: SolverConfig = DEFAULT_CONFIG,
               bc: BoundaryPolicy | None = None) -> Trajectory:
    """Integrate ``problem`` over ``ts.N`` steps; level 0 is the sampled initial data."""
    bc = problem.boundary if bc is None else bc
    s = problem.splitting
    u = np.asarray(problem.initial(grid.x), dtype=float).copy()
    check_finite(u, "initial data")
    traj = Trajectory(grid, ts, [u.copy()], [], [], [], [], [], [], [], bc.rotate_cells)
    traj.level_diagnostics(u)
    for n in range(ts.N):
        try:
            u, info = step_scalar(u, s, grid, ts.tau, cfg, bc, (n + 1) * ts.tau)
        except NodeSolveError as e:
            raise e.located(step=n + 1)
        check_finite(u, f"solution at step {n + 1}")
        traj.fields.append(u.copy())
        traj.level_diagnostics(u)
        traj.mass_residual.append(info.mass_residual)
        traj.corrector_iters.append(info.corrector_iters)
        traj.courant.append(info.courant)
    return traj
