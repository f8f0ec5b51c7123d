"""Grids, time stepping, solver configuration and elementary diagnostics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with nodes ``x_i = x_lo + i*h`` for ``i = 0..I``."""

    x_lo: float
    x_hi: float
    I: int
    h: float

    @property
    def n_nodes(self) -> int:
        return self.I + 1

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + self.h * np.arange(self.I + 1)


def build_grid(x_lo: float, x_hi: float, I: int) -> Grid1D:
    if I < 4:
        raise ValueError(f"need at least 4 cells, got I={I}")
    if not x_hi > x_lo:
        raise ValueError(f"empty domain [{x_lo}, {x_hi}]")
    return Grid1D(float(x_lo), float(x_hi), int(I), (x_hi - x_lo) / I)


@dataclass(frozen=True)
class TimeStepping:
    tau: float
    N: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.N < 0:
            raise ValueError("N must be nonnegative")

    @property
    def t_end(self) -> float:
        return self.N * self.tau

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.N + 1)

    @classmethod
    def from_ratio(cls, grid: Grid1D, tau_ratio: float, t_end: float) -> "TimeStepping":
        """Steps of size ``tau_ratio*h``; ``t_end`` must be a whole number of steps."""
        tau = tau_ratio * grid.h
        n = round(t_end / tau)
        if n < 0 or abs(n * tau - t_end) > 1e-9 * max(1.0, abs(t_end)):
            raise ValueError(f"t_end={t_end} is not a multiple of tau={tau}")
        return cls(tau, int(n))


@dataclass(frozen=True)
class CourantBounds:
    c_plus: float = 0.0
    c_minus: float = 0.0

    def __post_init__(self):
        if self.c_plus < 0 or self.c_minus < 0:
            raise ValueError("Courant bounds must be nonnegative")

    def effective(self, direction: str) -> float:
        c = self.c_plus if direction == "forward" else self.c_minus
        return max(1.0, c)


class Scheme(enum.Enum):
    FIRST_ORDER = "first-order"
    FIXED_OMEGA = "fixed-omega"
    HIGH_RESOLUTION = "hires"


class Limiter(enum.Enum):
    OMEGA = "omega"
    MINMOD = "minmod"  # ENO-like alternative, kept for comparison


@dataclass(frozen=True)
class SolverConfig:
    scheme: Scheme = Scheme.HIGH_RESOLUTION
    omega: float = 1.0
    # absolute threshold; None means epsilon_scale * max(1, max|f+-(u^n)|) per step
    epsilon: float | None = None
    epsilon_scale: float = 1e-12
    max_corrector_iters: int = 1
    corrector_stop_tol: float = 1e-10
    root_abs_tol: float = 1e-12
    root_max_iters: int = 100
    use_local_courant: bool = False
    limiter: Limiter = Limiter.OMEGA

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError("omega must lie in [0, 1]")
        if self.max_corrector_iters < 0:
            raise ValueError("max_corrector_iters must be >= 0")
        if self.root_abs_tol <= 0 or self.corrector_stop_tol <= 0:
            raise ValueError("tolerances must be positive")

    def threshold(self, flux_scale: float) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return self.epsilon_scale * max(1.0, flux_scale)


def total_variation(u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape[0] < 2:
        raise ValueError("total variation needs at least two values")
    return float(np.abs(np.diff(u, axis=0)).sum())


def extrema_excess(u, lo: float, hi: float) -> float:
    """Largest over/undershoot of ``u`` beyond ``[lo, hi]`` (0 if contained)."""
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    u = np.asarray(u, dtype=float)
    return max(0.0, float(u.max()) - hi) + max(0.0, lo - float(u.min()))


def check_finite(values: np.ndarray, what: str = "field") -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(np.asarray(values).reshape(len(values), -1)).any(axis=1))[0])
        raise FloatingPointError(f"{what} has a non-finite entry at node {bad}")


def is_power_of_two_chain(cells) -> bool:
    cells = list(cells)
    return all(b == 2 * a for a, b in zip(cells, cells[1:]))


EPS = math.ulp(1.0)


@dataclass
class Trajectory:
    """All time levels of a run plus per-level and per-step diagnostics.

    ``fields[n]`` holds level ``n`` (shape ``(I+1,)`` or ``(I+1, m)``). When
    the run rotates the periodic field back after every step,
    ``rotate_cells`` is the per-step shift, so level ``n`` at node ``i``
    approximates the solution at ``x_i + n*rotate_cells*h``.
    """

    grid: Grid1D
    ts: TimeStepping
    fields: list
    tv: list
    umin: list
    umax: list
    mass: list
    mass_residual: list
    corrector_iters: list
    courant: list
    rotate_cells: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def sample_points(self, n: int) -> np.ndarray:
        return self.grid.x + n * self.rotate_cells * self.grid.h

    def level_diagnostics(self, u: np.ndarray) -> None:
        self.tv.append(_tv_any(u))
        self.umin.append(np.min(u, axis=0))
        self.umax.append(np.max(u, axis=0))
        self.mass.append(self.grid.h * np.sum(u, axis=0))

    @property
    def tv_increase(self) -> np.ndarray:
        tv = np.asarray(self.tv, dtype=float)
        return np.diff(tv, axis=0)


def _tv_any(u: np.ndarray):
    return np.abs(np.diff(u, axis=0)).sum(axis=0)
