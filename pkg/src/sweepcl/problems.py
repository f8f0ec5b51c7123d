"""Catalog of 1D test problems with initial data, exact solutions and defaults."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary import BoundaryPolicy, Side
from .flux import (FluxSplitting, SystemSplitting, advection_split, burgers_split,
                   system_lax_friedrichs_split)


@dataclass(frozen=True)
class EigenStructure:
    lambdas: np.ndarray
    R: np.ndarray
    Rinv: np.ndarray

    @property
    def m(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class ProblemDefaults:
    cells: tuple
    tau_ratio: float
    t_end: float
    snapshots: tuple = ()


@dataclass(frozen=True)
class TestProblem:
    __test__ = False  # not a pytest class

    name: str
    m: int
    domain: tuple
    initial: Callable
    splitting: FluxSplitting | SystemSplitting
    boundary: BoundaryPolicy
    defaults: ProblemDefaults
    exact: Callable | None = None
    eigen: Callable | None = None
    bounds: tuple | None = None  # range of the exact solution, for extrema monitors
    params: dict = field(default_factory=dict)

    @property
    def is_system(self) -> bool:
        return self.m > 1 or isinstance(self.splitting, SystemSplitting)


# --- linear advection with four profiles ------------------------------------

BALSARA = dict(a=0.5, z=-0.7, delta=0.005, alpha=10.0)
BALSARA["beta"] = math.log(2.0) / (36.0 * BALSARA["delta"] ** 2)


def _gauss(x, beta, z):
    return np.exp(-beta * (x - z) ** 2)


def _ellipse(x, alpha, a):
    return np.sqrt(np.maximum(1.0 - alpha ** 2 * (x - a) ** 2, 0.0))


def balsara_initial(x):
    x = np.asarray(x, dtype=float)
    c = BALSARA
    d = c["delta"]
    u = np.zeros_like(x)
    m = (-0.8 <= x) & (x <= -0.6)
    u[m] = (_gauss(x[m], c["beta"], c["z"] - d) + _gauss(x[m], c["beta"], c["z"] + d)
            + 4 * _gauss(x[m], c["beta"], c["z"])) / 6.0
    m = (-0.4 <= x) & (x <= -0.2)
    u[m] = 1.0
    m = (0.0 <= x) & (x <= 0.2)
    u[m] = 1.0 - np.abs(10.0 * (x[m] - 0.1))
    m = (0.4 <= x) & (x <= 0.6)
    u[m] = (_ellipse(x[m], c["alpha"], c["a"] - d) + _ellipse(x[m], c["alpha"], c["a"] + d)
            + 4 * _ellipse(x[m], c["alpha"], c["a"])) / 6.0
    return u


def balsara_advection(courant: int = 4, v: float = 1.0) -> TestProblem:
    """Four-profile advection on [-1, 1], rotated back by ``courant`` cells per step."""
    lo, hi = -1.0, 1.0

    def exact(x, t):
        xs = np.mod(np.asarray(x, dtype=float) - v * t - lo, hi - lo) + lo
        return balsara_initial(xs)

    if courant == int(courant):
        bc = BoundaryPolicy.periodic_rotate(int(courant))
    else:
        bc = BoundaryPolicy.compact_support_freeze()
    return TestProblem(
        "balsara", 1, (lo, hi), balsara_initial, advection_split(v), bc,
        ProblemDefaults((500, 1000), float(courant) / abs(v), 2.0, (2.0,)),
        exact=exact, bounds=(0.0, 1.0), params={"v": v, "courant": courant},
    )


# --- Burgers' equation ------------------------------------------------------

def burgers_smooth_exact(x, t, tol: float = 1e-14, max_iter: int = 100):
    """Solve ``u = 1 + sin(2 pi (x - u t))/8`` pointwise by safeguarded Newton."""
    x = np.asarray(x, dtype=float)
    lo = np.full_like(x, 0.875)
    hi = np.full_like(x, 1.125)
    u = 1.0 + np.sin(2 * np.pi * (x - t)) / 8.0
    for _ in range(max_iter):
        arg = 2 * np.pi * (x - u * t)
        F = u - 1.0 - np.sin(arg) / 8.0
        conv = np.abs(F) <= tol
        if conv.all():
            return u
        lo = np.where(F < 0, u, lo)
        hi = np.where(F > 0, u, hi)
        dF = 1.0 + 2 * np.pi * t * np.cos(arg) / 8.0
        un = u - F / dF
        bad = ~((un > lo) & (un < hi)) | (dF <= 0)
        un = np.where(bad, 0.5 * (lo + hi), un)
        u = np.where(conv, u, un)
    raise ArithmeticError("characteristic equation did not converge")


def burgers_smooth() -> TestProblem:
    exact = burgers_smooth_exact
    return TestProblem(
        "burgers-smooth", 1, (0.0, 1.0),
        lambda x: 1.0 + np.sin(2 * np.pi * np.asarray(x, dtype=float)) / 8.0,
        burgers_split(), BoundaryPolicy.exact_dirichlet(exact),
        ProblemDefaults((40, 80, 160, 320), 4.0, 1.0, (1.0,)),
        exact=exact, bounds=(0.875, 1.125),
    )


def burgers_slow_shock(u_left: float = 20.0, u_right: float = -18.0, x0: float = -0.5) -> TestProblem:
    speed = 0.5 * (u_left + u_right)

    def exact(x, t):
        x = np.asarray(x, dtype=float)
        return np.where(x < x0 + speed * t, u_left, u_right)

    return TestProblem(
        "burgers-slow-shock", 1, (-1.0, 1.0), lambda x: exact(x, 0.0), burgers_split(),
        BoundaryPolicy.exact_dirichlet(exact),
        ProblemDefaults((20, 40), 0.5, 1.0, (1.0,)),
        exact=exact, bounds=(min(u_left, u_right), max(u_left, u_right)),
        params={"shock_speed": speed, "x0": x0},
    )


def shock_rarefaction_initial(x):
    x = np.asarray(x, dtype=float)
    return np.where((0.3 < x) & (x < 0.6), 1.0, -0.2)


def shock_rarefaction_exact(x, t):
    x = np.asarray(x, dtype=float)
    if t <= 0:
        return shock_rarefaction_initial(x)
    left = 0.3 - 0.2 * t
    u = np.full_like(x, -0.2)
    if t < 0.5:
        fan = (left <= x) & (x <= 0.3 + t)
        plateau = (0.3 + t <= x) & (x < 0.6 + 0.4 * t)
        u[plateau] = 1.0
    else:
        fan = (left <= x) & (x < left + 0.6 * math.sqrt(2 * t))
    u[fan] = (x[fan] - 0.3) / t
    return u


def burgers_shock_rarefaction() -> TestProblem:
    return TestProblem(
        "burgers-shock-rarefaction", 1, (0.0, 1.0), shock_rarefaction_initial, burgers_split(),
        BoundaryPolicy.exact_dirichlet(shock_rarefaction_exact),
        ProblemDefaults((160, 320, 640, 1280), 4.0, 1.0, (0.25, 0.5, 0.75, 1.0)),
        exact=shock_rarefaction_exact, bounds=(-0.2, 1.0),
    )


# --- linear hyperbolic system -----------------------------------------------

LINEAR_A = 0.5 * np.array([[1.1, -0.9], [-0.9, 1.1]])
_LIN_EIGEN = EigenStructure(np.array([0.1, 1.0]), np.array([[1.0, 1.0], [1.0, -1.0]]),
                            0.5 * np.array([[1.0, 1.0], [1.0, -1.0]]))


def linear_system_initial(x):
    x = np.asarray(x, dtype=float)
    q = np.zeros(x.shape + (2,))
    q[..., 0] = np.where((0.1 < x) & (x < 0.3), 0.8, 0.0)
    q[..., 1] = np.where((0.5 < x) & (x < 0.7), 0.8, 0.0)
    return q


def linear_system_exact(x, t):
    """Each characteristic variable ``w = R^-1 q`` is advected rigidly at its speed."""
    x = np.asarray(x, dtype=float)
    es = _LIN_EIGEN
    w = np.stack([(linear_system_initial(x - lam * t) @ es.Rinv.T)[..., p]
                  for p, lam in enumerate(es.lambdas)], axis=-1)
    return w @ es.R.T


def linear_system() -> TestProblem:
    A = LINEAR_A
    split = SystemSplitting(lambda q: q @ A.T, lambda q: A, 2, None, "linear")
    return TestProblem(
        "linear-system", 2, (0.0, 1.0), linear_system_initial, split,
        BoundaryPolicy.exact_dirichlet(linear_system_exact),
        ProblemDefaults((400, 800), 10.0, 0.4, (0.15, 0.4)),
        exact=linear_system_exact, eigen=lambda q: _LIN_EIGEN, bounds=(0.0, 0.8),
    )


# --- shallow water ------------------------------------------------------------

def shallow_water_flux(q):
    q = np.asarray(q, dtype=float)
    h, hu = q[..., 0], q[..., 1]
    return np.stack([hu, hu * hu / h + 0.5 * h * h], axis=-1)


def shallow_water_jacobian(q):
    h, hu = q[0], q[1]
    u = hu / h
    return np.array([[0.0, 1.0], [h - u * u, 2.0 * u]])


def shallow_water_eigen(q) -> EigenStructure:
    h, hu = q[0], q[1]
    u = hu / h
    c = math.sqrt(h)
    R = np.array([[1.0, 1.0], [u - c, u + c]])
    Rinv = np.array([[u + c, -1.0], [c - u, 1.0]]) / (2.0 * c)
    return EigenStructure(np.array([u - c, u + c]), R, Rinv)


def shallow_water_initial(x):
    x = np.asarray(x, dtype=float)
    q = np.zeros(x.shape + (2,))
    q[..., 0] = 1.0 + 0.4 * np.exp(-5.0 * (x - 5.0) ** 2)
    return q


def shallow_water(alpha: float = 1.3) -> TestProblem:
    split = system_lax_friedrichs_split(shallow_water_flux, shallow_water_jacobian, 2, alpha)
    bc = BoundaryPolicy(Side.DIRICHLET, Side.EXTRAPOLATE, lambda x, t: np.array([1.0, 0.0]))
    return TestProblem(
        "shallow-water", 2, (0.0, 10.0), shallow_water_initial, split, bc,
        ProblemDefaults((400, 800), 5.0, 2.0, (1.0, 2.0)),
        eigen=shallow_water_eigen, params={"alpha": alpha},
    )


CATALOG = {
    "balsara": balsara_advection,
    "burgers-smooth": burgers_smooth,
    "burgers-slow-shock": burgers_slow_shock,
    "burgers-shock-rarefaction": burgers_shock_rarefaction,
    "linear-system": linear_system,
    "shallow-water": shallow_water,
}


def get_problem(name: str, **kwargs) -> TestProblem:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; available: {', '.join(CATALOG)}") from None
    return factory(**kwargs)
