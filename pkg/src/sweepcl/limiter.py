"""Solution-adaptive weights for the compact implicit second-order flux.

Per face the correction term of the first-order flux is scaled by ``l`` and
blends a central (``omega=0``) and a fully upwinded (``omega=1``) stencil. The
effective flux-limiter value is ``psi = 1 - omega + omega*r``. For Courant
numbers ``C >= 1`` the choices below keep the products ``l*psi`` inside the
region where the implicit update is a convex (TVD) combination:

    -1/C <= l' psi' <= 2,   -2 + l' psi' <= l psi / r <= 2/C + l' psi'

with primed values taken at the upwind neighbour.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Limiter


@dataclass(frozen=True)
class LimiterInputs:
    delta_up: float
    delta_dw: float

    def ratio(self, eps: float = 0.0) -> float | None:
        if abs(self.delta_dw) <= eps:
            return None
        return self.delta_up / self.delta_dw


@dataclass(frozen=True)
class LimiterParams:
    omega: float = 0.0
    psi: float = 1.0
    l: float = 1.0

    @property
    def lpsi(self) -> float:
        return self.l * self.psi


DEFAULT = LimiterParams()


def omega_of(r: float, C: float) -> float:
    if r >= 2.0:
        return 1.0 / (r - 1.0)
    if r <= -1.0 / C:
        return (1.0 + C) / (C * (1.0 - r))
    return 1.0


def omega_minmod(r: float) -> float:
    return 1.0 if abs(r) <= 1.0 else 0.0


def psi_of(omega: float, r: float) -> float:
    return 1.0 - omega + omega * r


def l_of(r: float, psi: float, C: float, neighbor_lpsi: float, eps: float = 1e-12) -> float:
    """Damping factor; ``neighbor_lpsi`` is ``l*psi`` of the upwind neighbour in sweep order."""
    if abs(psi) <= eps:
        return 1.0
    return min(1.0, max(0.0, r / psi * (2.0 / C + neighbor_lpsi)))


def limiter_params(r: float, C: float, neighbor_lpsi: float, eps: float = 1e-12,
                   limiter: Limiter = Limiter.OMEGA) -> LimiterParams:
    if limiter is Limiter.MINMOD:
        w = omega_minmod(r)
    else:
        w = omega_of(r, C)
    psi = psi_of(w, r)
    return LimiterParams(w, psi, l_of(r, psi, C, neighbor_lpsi, eps))


def tvd_inequalities_hold(params_prev: LimiterParams, params_cur: LimiterParams,
                          r: float, C: float, slack: float = 1e-12) -> bool:
    lp = params_prev.lpsi
    q = params_cur.lpsi / r
    ok_prev = -1.0 / C - slack <= lp <= 2.0 + slack
    ok_cur = -2.0 + lp - slack <= q <= 2.0 / C + lp + slack * max(1.0, abs(q))
    return ok_prev and ok_cur
