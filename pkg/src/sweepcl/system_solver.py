"""Two-sweep implicit stepping for m-component systems.

The second-order correction of the upwind flux is expanded in the
eigenvectors ``r^p`` of the flux Jacobian, evaluated at the latest estimate
of the node value::

    alpha = R^-1 (g(q) - g(q_{i+1}^old)),   beta = R^-1 (g(q_{i-1}^new) - g(q_i^old))
    F_{i+1/2} = g(q) - 1/2 sum_p l^p ((1 - w^p) alpha^p + w^p beta^p) r^p

and each characteristic family gets its own limiter weights, exactly as a
scalar would. With the weights (and ``R``) frozen the flux is affine in
``g(q)``, ``F = M g(q) + b`` with ``M = I - 1/2 R diag(l(1-w)) R^-1``, so each
node solve is a small Newton iteration on ``q + lam M g(q) = rhs``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryPolicy, Side
from .core import (CourantBounds, Grid1D, Limiter, Scheme, SolverConfig, TimeStepping,
                   Trajectory, check_finite)
from .flux import SystemSplitting
from .limiter import LimiterParams, limiter_params
from .problems import EigenStructure
from .scalar_solver import NodeSolveError, NoConvergence

DEFAULT_CONFIG = SolverConfig()


class SingularJacobian(NodeSolveError):
    pass


@dataclass(frozen=True)
class CharacteristicIncrements:
    alpha: np.ndarray
    beta: np.ndarray
    r_comp: np.ndarray  # nan where the ratio is undefined
    lim: tuple

    @property
    def w(self) -> np.ndarray:
        return np.array([p.omega for p in self.lim])

    @property
    def l(self) -> np.ndarray:
        return np.array([p.l for p in self.lim])

    @property
    def psi(self) -> np.ndarray:
        return np.array([p.psi for p in self.lim])

    @property
    def lpsi(self) -> np.ndarray:
        return np.array([p.lpsi for p in self.lim])


def _check_eigen(es: EigenStructure) -> None:
    R, Rinv = np.asarray(es.R), np.asarray(es.Rinv)
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(Rinv))):
        raise ValueError("eigenvector matrix is not finite (loss of hyperbolicity)")
    if np.abs(R @ Rinv - np.eye(len(R))).max() > 1e-8:
        raise ValueError("eigenvector matrix is singular or Rinv is not its inverse")


def characteristic_increments(es: EigenStructure, f_here_new, f_right_old, f_left_new,
                              f_here_old, C=1.0, neighbor_lpsi=None, eps: float = 0.0,
                              limiter: Limiter = Limiter.OMEGA) -> CharacteristicIncrements:
    """Project both flux jumps on the eigenvectors and pick limiter weights per family.

    ``C`` (scalar or per family) is the effective Courant number, at least 1.
    Families with a flat upstream jump get ``w = 1``; families with a flat
    downstream jump keep the defaults ``w = 0, l = 1``.
    """
    _check_eigen(es)
    m = len(es.lambdas)
    a = es.Rinv @ (np.asarray(f_here_new, dtype=float) - np.asarray(f_right_old, dtype=float))
    b = es.Rinv @ (np.asarray(f_left_new, dtype=float) - np.asarray(f_here_old, dtype=float))
    C = np.broadcast_to(np.asarray(C, dtype=float), (m,))
    nb = np.ones(m) if neighbor_lpsi is None else np.broadcast_to(neighbor_lpsi, (m,))
    r = np.full(m, np.nan)
    lim = []
    for p in range(m):
        if abs(b[p]) <= eps:
            psi = b[p] / a[p] if abs(a[p]) > eps else 1.0
            lim.append(LimiterParams(1.0, psi, 1.0))
        elif abs(a[p]) <= eps:
            lim.append(LimiterParams())
        else:
            r[p] = b[p] / a[p]
            lim.append(limiter_params(r[p], max(1.0, C[p]), nb[p], eps, limiter))
    return CharacteristicIncrements(a, b, r, tuple(lim))


def _affine_parts(es: EigenStructure, w, l, beta, g_right_old):
    """``M`` and ``b`` of the frozen flux ``F = M g(q) + b``."""
    d = l * (1.0 - w)
    P = (es.R * d) @ es.Rinv
    M = np.eye(len(d)) - 0.5 * P
    b = 0.5 * (P @ g_right_old) - 0.5 * (es.R @ (l * w * beta))
    return M, b


def hires_system_flux(f_here_new, ci: CharacteristicIncrements, es: EigenStructure) -> np.ndarray:
    corr = ci.l * ((1.0 - ci.w) * ci.alpha + ci.w * ci.beta)
    return np.asarray(f_here_new, dtype=float) - 0.5 * (es.R @ corr)


def solve_node_system(coef: float, g, rhs, cfg: SolverConfig = DEFAULT_CONFIG, *, jac,
                      M=None, x0=None) -> np.ndarray:
    """Solve ``q + coef * M g(q) = rhs`` by Newton's method with a halving line search."""
    if coef < 0:
        raise ValueError("coef must be nonnegative")
    rhs = np.asarray(rhs, dtype=float)
    if coef == 0.0:
        return rhs.copy()
    m = len(rhs)
    M = np.eye(m) if M is None else np.asarray(M, dtype=float)
    eye = np.eye(m)
    cM = coef * M

    def resid(q):
        gq = np.asarray(g(q), dtype=float)
        return q + cM @ gq - rhs, gq

    q = rhs.copy() if x0 is None else np.array(x0, dtype=float)
    res, gq = resid(q)
    for _ in range(cfg.root_max_iters):
        nr = np.abs(res).max()
        tol = max(cfg.root_abs_tol, 4e-16 * (np.abs(q).max() + np.abs(cM @ gq).max()
                                               + np.abs(rhs).max()))
        if nr <= tol:
            return q
        J = eye + cM @ np.asarray(jac(q), dtype=float)
        try:
            dq = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            raise SingularJacobian("singular Newton matrix in node solve") from None
        if not np.all(np.isfinite(dq)):
            raise SingularJacobian("non-finite Newton step in node solve")
        t = 1.0
        for _ in range(40):
            qn = q + t * dq
            with np.errstate(all="ignore"):
                rn, gn = resid(qn)
            n_new = np.abs(rn).max()
            if np.isfinite(n_new) and n_new < (1.0 - 1e-4 * t) * nr:
                break
            t *= 0.5
        else:
            if np.isfinite(n_new) and n_new <= nr:
                return q  # stalled at round-off level
            raise NoConvergence(f"line search failed (residual {nr:.3e})")
        q, res, gq = qn, rn, gn
    raise NoConvergence(f"system node solve did not converge in {cfg.root_max_iters} "
                        f"iterations (residual {np.abs(res).max():.3e})")


# --- sweeps -------------------------------------------------------------------

@dataclass
class SystemSweepRecord:
    direction: str
    lo: int
    hi: int
    omega: np.ndarray  # (I+1, m), original numbering
    l: np.ndarray
    iters: np.ndarray
    faces: np.ndarray  # sweep orientation, index lo-1..hi
    residual: np.ndarray  # per-component conservation defect of the sweep
    skipped: bool = False


@dataclass
class _Oriented:
    g: object
    jac: object
    speeds: object  # eigenvalues of the problem Jacobian -> speeds of g


def _oriented(s: SystemSplitting, direction: str) -> _Oriented:
    if direction == "forward":
        return _Oriented(s.f_plus, s.jac_plus, s.speeds_plus)
    return _Oriented(lambda q: -s.f_minus(q), lambda q: -s.jac_minus(q),
                     lambda lam: -s.speeds_minus(lam))


def eigen_map(problem):
    """The problem's eigen-structure map; a 1x1 identity frame for scalar-like systems."""
    if problem.eigen is not None:
        return problem.eigen
    if problem.m != 1:
        raise ValueError(f"problem {problem.name!r} has no eigen-structure")
    jac = problem.splitting.jac

    def unit(q):
        return EigenStructure(np.array([float(np.asarray(jac(q)).reshape(-1)[0])]),
                              np.eye(1), np.eye(1))
    return unit


def family_courant(s: SystemSplitting, eigen, q: np.ndarray, lam: float, direction: str) -> np.ndarray:
    o = _oriented(s, direction)
    sp = np.array([o.speeds(eigen(qi).lambdas) for qi in q])
    return np.maximum(0.0, lam * sp.max(axis=0))


def _boundary_face(cfg, g, eigen, old, new, gold, lo, ghost_new, C, eps):
    """Inflow face flux in sweep orientation and the ``l*psi`` seed, per family."""
    m = len(gold[lo])
    gb = np.asarray(g(new[lo - 1]), dtype=float)
    if cfg.scheme is Scheme.FIRST_ORDER:
        return gb, np.ones(m)
    if ghost_new is None:
        return 0.5 * (gb + gold[lo]), np.ones(m)
    d_up = np.asarray(g(ghost_new), dtype=float) - np.asarray(g(old[lo - 1]), dtype=float)
    if cfg.scheme is Scheme.FIXED_OMEGA:
        w = cfg.omega
        return gb - 0.5 * ((1 - w) * (gb - gold[lo]) + w * d_up), np.ones(m)
    es = eigen(new[lo - 1])
    beta = es.Rinv @ d_up
    if np.all(np.abs(beta) <= eps):
        return gb - 0.5 * d_up, np.ones(m)
    ci = characteristic_increments(es, gb, gold[lo], np.asarray(g(ghost_new)), g(old[lo - 1]),
                                   C, np.ones(m), eps, cfg.limiter)
    return hires_system_flux(gb, ci, es), ci.lpsi


def _sweep_kernel(old, new, o: _Oriented, eigen, lo, hi, lam, C, eps, cfg, ghost_new=None):
    """Forward-oriented system sweep; ``old`` has one extrapolated ghost row at the end."""
    n, m = new.shape
    faces = np.full((n, m), np.nan)
    ws = np.full((n, m), np.nan)
    ls = np.full((n, m), np.nan)
    its = np.zeros(n, dtype=int)
    g, jac = o.g, o.jac
    gold = [np.asarray(g(q), dtype=float) for q in old]
    eye = np.eye(m)
    scheme = cfg.scheme

    Fm, nb = _boundary_face(cfg, g, eigen, old, new, gold, lo, ghost_new, C, eps)
    faces[lo - 1] = Fm
    for i in range(lo, hi + 1):
        qi = old[i]
        gp = gold[i + 1]
        base = qi + lam * Fm
        try:
            if scheme is Scheme.FIRST_ORDER:
                M, b = eye, np.zeros(m)
                w, l = np.zeros(m), np.zeros(m)
                u = solve_node_system(lam, g, base, cfg, jac=jac, x0=qi)
                lpsi = np.zeros(m)
            else:
                d_up = np.asarray(g(new[i - 1]), dtype=float) - gold[i]
                if scheme is Scheme.FIXED_OMEGA:
                    wf = cfg.omega
                    M = (1.0 - 0.5 * (1.0 - wf)) * eye
                    b = 0.5 * ((1.0 - wf) * gp - wf * d_up)
                    w, l = np.full(m, wf), np.ones(m)
                    u = solve_node_system(lam, g, base - lam * b, cfg, jac=jac, M=M, x0=qi)
                    lpsi = np.ones(m)
                else:
                    u, M, b, w, l, lpsi, its[i] = _hires_node(
                        qi, gp, gold[i], d_up, base, g, jac, eigen, lam, C, nb, eps, cfg)
        except NodeSolveError as e:
            raise e.located(node=i)
        Fm = M @ np.asarray(g(u), dtype=float) + b
        new[i] = u
        faces[i] = Fm
        ws[i], ls[i] = w, l
        nb = lpsi
    return faces, ws, ls, its


def _hires_node(qi, gp, gi, d_up, base, g, jac, eigen, lam, C, nb, eps, cfg):
    m = len(qi)
    eye = np.eye(m)
    es0 = eigen(qi)
    if np.all(np.abs(es0.Rinv @ d_up) <= eps):
        # flat upstream data in every family: fully upwinded weights
        M, b = eye, -0.5 * d_up
        u = solve_node_system(lam, g, base - lam * b, cfg, jac=jac, x0=qi)
        es = eigen(u)
        alpha = es.Rinv @ (np.asarray(g(u), dtype=float) - gp)
        beta = es.Rinv @ d_up
        psi = np.where(np.abs(alpha) > eps, beta / np.where(alpha == 0, 1.0, alpha), 1.0)
        return u, M, b, np.ones(m), np.ones(m), psi, 0

    # predictor: central weight, no damping
    M, b = 0.5 * eye, 0.5 * gp
    uk = solve_node_system(lam, g, base - lam * b, cfg, jac=jac, M=M, x0=qi)
    w, l, lpsi = np.zeros(m), np.ones(m), np.ones(m)
    iters = 0
    for _ in range(cfg.max_corrector_iters):
        es = eigen(uk)
        ci = characteristic_increments(es, g(uk), gp, gi + d_up, gi, C, nb, eps, cfg.limiter)
        w, l, lpsi = ci.w, ci.l, ci.lpsi
        M, b = _affine_parts(es, w, l, ci.beta, gp)
        u = solve_node_system(lam, g, base - lam * b, cfg, jac=jac, M=M, x0=uk)
        iters += 1
        done = np.abs(u - uk).max() < cfg.corrector_stop_tol
        uk = u
        if done:
            break
    return uk, M, b, w, l, lpsi, iters


def _extend_ghost(old: np.ndarray) -> np.ndarray:
    return np.vstack([old, 2.0 * old[-1] - old[-2]])


def sweep_system(direction: str, q_old: np.ndarray, q_target: np.ndarray, s: SystemSplitting,
                 eigen, grid: Grid1D, dt: float, cfg: SolverConfig, bc: BoundaryPolicy,
                 C, eps: float, t_new: float | None = None) -> SystemSweepRecord:
    """One sweep; ``q_target`` (already holding boundary values) is updated in place."""
    I = grid.I
    lam = dt / grid.h
    o = _oriented(s, direction)
    sl = slice(None) if direction == "forward" else slice(None, None, -1)
    lo, hi = bc.solved_range(I, direction)
    old_o = np.array(q_old[sl], dtype=float)
    new_o = np.array(q_target[sl], dtype=float)
    n, m = old_o.shape
    if not np.any(np.asarray(o.g(old_o)) != 0.0) and not np.any(np.asarray(o.g(new_o[lo - 1])) != 0.0):
        return SystemSweepRecord(direction, lo, hi, np.zeros((n, m)), np.zeros((n, m)),
                                 np.zeros(n, dtype=int), np.zeros((hi - lo + 2, m)),
                                 np.zeros(m), skipped=True)
    ghost = None
    if t_new is not None and bc.sides(direction)[0] is Side.DIRICHLET:
        xg = grid.x_lo - grid.h if direction == "forward" else grid.x_hi + grid.h
        ghost = np.asarray(bc.values(xg, t_new), dtype=float)
    faces, w, l, its = _sweep_kernel(_extend_ghost(old_o), new_o, o, eigen, lo, hi, lam,
                                     C, eps, cfg, ghost)
    q_target[:] = new_o[sl]
    F = faces[lo - 1:hi + 1]
    residual = grid.h * (new_o[lo:hi + 1] - old_o[lo:hi + 1]).sum(axis=0) + dt * (F[-1] - F[0])
    return SystemSweepRecord(direction, lo, hi, w[sl], l[sl], its[sl], F, residual)


@dataclass
class SystemStepInfo:
    records: list
    courant_plus: np.ndarray
    courant_minus: np.ndarray
    char_courant: float  # max |lambda| tau/h of the unsplit Jacobian on level n
    eps: float
    mass_residual: np.ndarray
    corrector_iters: int


def _flux_scale(s: SystemSplitting, q: np.ndarray) -> float:
    return float(max(np.abs(s.f_plus(q)).max(), np.abs(s.f_minus(q)).max()))


def step_system(q: np.ndarray, s: SystemSplitting, eigen, grid: Grid1D, tau: float,
                cfg: SolverConfig, bc: BoundaryPolicy, t_new: float):
    lam = tau / grid.h
    q_old = np.array(q, dtype=float)
    q_half = q_old.copy()
    bc.apply_dirichlet(q_half, grid.x, t_new)
    eps = cfg.threshold(_flux_scale(s, q_old))
    cp = family_courant(s, eigen, q_old, lam, "forward")
    rec_f = sweep_system("forward", q_old, q_half, s, eigen, grid, tau, cfg, bc,
                         np.maximum(1.0, cp), eps, t_new)
    q_new = q_half.copy()
    cm = family_courant(s, eigen, q_half, lam, "backward")
    rec_b = sweep_system("backward", q_half, q_new, s, eigen, grid, tau, cfg, bc,
                         np.maximum(1.0, cm), eps, t_new)
    cc = lam * max(np.abs(eigen(qi).lambdas).max() for qi in q_old)
    info = SystemStepInfo([rec_f, rec_b], cp, cm, float(cc), eps,
                          rec_f.residual + rec_b.residual,
                          int(rec_f.iters.sum() + rec_b.iters.sum()))
    return bc.rotate(q_new), info


@dataclass
class SystemTrajectory(Trajectory):
    char_courant: list = field(default_factory=list)


def run_system(problem, grid: Grid1D, ts: TimeStepping, cfg: SolverConfig = DEFAULT_CONFIG,
               bc: BoundaryPolicy | None = None) -> SystemTrajectory:
    bc = problem.boundary if bc is None else bc
    s = problem.splitting
    eigen = eigen_map(problem)
    q = np.asarray(problem.initial(grid.x), dtype=float).reshape(grid.n_nodes, problem.m).copy()
    check_finite(q, "initial data")
    traj = SystemTrajectory(grid, ts, [q.copy()], [], [], [], [], [], [], [], bc.rotate_cells)
    traj.level_diagnostics(q)
    for n in range(ts.N):
        try:
            q, info = step_system(q, s, eigen, grid, ts.tau, cfg, bc, (n + 1) * ts.tau)
        except NodeSolveError as e:
            raise e.located(step=n + 1)
        check_finite(q, f"solution at step {n + 1}")
        traj.fields.append(q.copy())
        traj.level_diagnostics(q)
        traj.mass_residual.append(info.mass_residual)
        traj.corrector_iters.append(info.corrector_iters)
        traj.courant.append(CourantBounds(float(info.courant_plus.max()),
                                          float(info.courant_minus.max())))
        traj.char_courant.append(info.char_courant)
    return traj
