"""Flux functions and monotone splittings ``f = f+ + f-``.

Scalar splittings are plain callables that accept floats or numpy arrays.
System splittings act on state vectors ``q`` of shape ``(m,)`` or ``(n, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Map = Callable


@dataclass(frozen=True)
class FluxSplitting:
    f: Map
    f_plus: Map
    f_minus: Map
    df_plus: Map
    df_minus: Map
    alpha: float = 0.0
    name: str = ""


def lax_friedrichs_split(f: Map, df: Map, alpha: float) -> FluxSplitting:
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    a = float(alpha)
    return FluxSplitting(
        f=f,
        f_plus=lambda u: 0.5 * (f(u) + a * u),
        f_minus=lambda u: 0.5 * (f(u) - a * u),
        df_plus=lambda u: 0.5 * (df(u) + a),
        df_minus=lambda u: 0.5 * (df(u) - a),
        alpha=a,
        name=f"lax-friedrichs(alpha={a:g})",
    )


def burgers_split() -> FluxSplitting:
    # f+- = (u^2/2 +- |u|u/2)/2, i.e. u^2/2 on the matching half-line, 0 elsewhere
    return FluxSplitting(
        f=lambda u: 0.5 * u * u,
        f_plus=lambda u: 0.25 * (u * u + abs(u) * u),
        f_minus=lambda u: 0.25 * (u * u - abs(u) * u),
        df_plus=lambda u: 0.5 * (u + abs(u)),
        df_minus=lambda u: 0.5 * (u - abs(u)),
        name="burgers",
    )


def advection_split(v: float) -> FluxSplitting:
    v = float(v)
    zero = lambda u: 0.0 * u  # noqa: E731
    lin = lambda u: v * u  # noqa: E731
    if v >= 0:
        return FluxSplitting(lin, lin, zero, lambda u: v + 0.0 * u, zero, abs(v), f"advection(v={v:g})")
    return FluxSplitting(lin, zero, lin, zero, lambda u: v + 0.0 * u, abs(v), f"advection(v={v:g})")


@dataclass(frozen=True)
class SystemSplitting:
    """Lax-Friedrichs splitting of an m-component flux.

    With ``alpha=None`` the flux is assumed to have nonnegative characteristic
    speeds and is not split: ``f+ = f`` and ``f- = 0``.
    """

    f: Map
    jac: Map
    m: int
    alpha: float | None = None
    name: str = ""

    @property
    def one_sided(self) -> bool:
        return self.alpha is None

    def f_plus(self, q):
        if self.alpha is None:
            return self.f(q)
        return 0.5 * (self.f(q) + self.alpha * q)

    def f_minus(self, q):
        if self.alpha is None:
            return 0.0 * q
        return 0.5 * (self.f(q) - self.alpha * q)

    def jac_plus(self, q):
        if self.alpha is None:
            return self.jac(q)
        return 0.5 * (self.jac(q) + self.alpha * np.eye(self.m))

    def jac_minus(self, q):
        if self.alpha is None:
            return np.zeros((self.m, self.m))
        return 0.5 * (self.jac(q) - self.alpha * np.eye(self.m))

    def speeds_plus(self, lambdas):
        """Eigenvalues of ``jac_plus`` given the eigenvalues of ``jac``."""
        lambdas = np.asarray(lambdas, dtype=float)
        if self.alpha is None:
            return lambdas
        return 0.5 * (lambdas + self.alpha)

    def speeds_minus(self, lambdas):
        lambdas = np.asarray(lambdas, dtype=float)
        if self.alpha is None:
            return np.zeros_like(lambdas)
        return 0.5 * (lambdas - self.alpha)


def system_lax_friedrichs_split(f: Map, jac: Map, m: int, alpha: float) -> SystemSplitting:
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return SystemSplitting(f, jac, m, float(alpha), f"lax-friedrichs(alpha={alpha:g})")


@dataclass(frozen=True)
class MonotonicityReport:
    violations: int
    worst: float
    samples: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def audit_monotonicity(s, samples, tol: float = 1e-12) -> MonotonicityReport:
    """Count samples where ``df+ >= 0`` or ``df- <= 0`` fails by more than ``tol``.

    For systems the signs are those of the eigenvalues of the split Jacobians.
    ``worst`` is the largest sign violation found (0 when none).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples to audit")
    if isinstance(s, SystemSplitting):
        states = samples.reshape(-1, s.m)
        bad = np.empty(len(states))
        for k, q in enumerate(states):
            lp = np.linalg.eigvals(s.jac_plus(q)).real
            lm = np.linalg.eigvals(s.jac_minus(q)).real
            bad[k] = max(0.0, -lp.min(), lm.max())
    else:
        states = samples.ravel()
        dp = np.broadcast_to(np.asarray(s.df_plus(states), dtype=float), states.shape)
        dm = np.broadcast_to(np.asarray(s.df_minus(states), dtype=float), states.shape)
        bad = np.maximum(0.0, np.maximum(-dp, dm))
    return MonotonicityReport(int((bad > tol).sum()), float(bad.max()), len(states))
