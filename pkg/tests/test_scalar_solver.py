from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sweepcl import (BoundaryPolicy, Scheme, Side, SolverConfig, TimeStepping, build_grid,
                     get_problem)
from sweepcl.flux import advection_split, burgers_split
from sweepcl.scalar_solver import (NoBracket, SweepWorkspace, first_order_sweep_backward,
                                   first_order_sweep_forward, fixed_omega_step, local_courant,
                                   run_scalar, solve_node_scalar, step_scalar)

from conftest import SCHEMES, rel, run_named


def test_node_solver_examples():
    assert solve_node_scalar(4, lambda u: u, 4) == pytest.approx(0.8, abs=1e-12)
    assert solve_node_scalar(0, lambda u: u ** 3, 7) == 7
    f = burgers_split().f_plus
    assert solve_node_scalar(1, f, 1.5) == pytest.approx(1.0, abs=1e-12)


def test_node_solver_flags_nonmonotone_map():
    with pytest.raises(NoBracket):
        solve_node_scalar(1.0, lambda u: -3.0 * u, 1.0)
    with pytest.raises(ValueError):
        solve_node_scalar(-1.0, lambda u: u, 1.0)


def _bisect(coef, g, rhs):
    lo, hi = -1e3, 1e3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid + coef * g(mid) - rhs > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_node_solver_matches_bisection():
    rng = np.random.default_rng(7)
    fams = [lambda a: (lambda u: a * u), lambda a: (lambda u: a * max(u, 0.0) ** 2 / 2),
            lambda a: (lambda u: a * np.tanh(u)), lambda a: (lambda u: -a * min(u, 0.0) ** 2 / 2)]
    for k in range(10_000):
        a = rng.uniform(0.0, 5.0)
        g = fams[k % 4](a)
        if k % 4 == 3:  # decreasing -f- is paired with g(u) -> -g(-u)
            g = (lambda h: (lambda u: -h(-u)))(g)
        coef = rng.uniform(0.0, 20.0)
        rhs = rng.uniform(-20.0, 20.0)
        u = solve_node_scalar(coef, g, rhs)
        assert abs(u - _bisect(coef, g, rhs)) <= 1e-11 * max(1.0, abs(u))


@given(st.floats(0, 50), st.floats(-100, 100), st.floats(0.01, 3))
def test_node_solver_residual(coef, rhs, a):
    g = lambda u: a * u * abs(u)  # noqa: E731
    u = solve_node_scalar(coef, g, rhs)
    assert abs(u + coef * g(u) - rhs) <= max(1e-12, 4e-16 * (abs(u) + abs(coef * g(u)) + abs(rhs)))


def _ws(u0, bc, g):
    return SweepWorkspace.start(np.array(u0, dtype=float), bc, g, 1.0)


def test_first_order_forward_example():
    g = build_grid(0, 1, 8)
    bc = BoundaryPolicy(Side.DIRICHLET, Side.EXTRAPOLATE, lambda x, t: 1.0)
    ws = _ws([1.0] + [0.0] * 8, bc, g)
    first_order_sweep_forward(ws, advection_split(1.0), g, 4 * g.h, bc)
    assert ws.u_half[1] == pytest.approx(0.8, abs=1e-12)
    assert ws.u_half[2] == pytest.approx(0.64, abs=1e-12)


def test_first_order_backward_mirror_example():
    g = build_grid(0, 1, 8)
    bc = BoundaryPolicy(Side.EXTRAPOLATE, Side.DIRICHLET, lambda x, t: 1.0)
    ws = _ws([0.0] * 8 + [1.0], bc, g)
    s = advection_split(-1.0)
    first_order_sweep_forward(ws, s, g, 4 * g.h, bc)
    np.testing.assert_array_equal(ws.u_half, ws.u_old)
    first_order_sweep_backward(ws, s, g, 4 * g.h, bc)
    assert ws.u_new[7] == pytest.approx(0.8, abs=1e-12)


def test_backward_sweep_is_identity_without_negative_flux():
    g = build_grid(0, 1, 16)
    bc = BoundaryPolicy.exact_dirichlet(lambda x, t: 0.0)
    rng = np.random.default_rng(1)
    ws = _ws(rng.uniform(0, 1, 17), bc, g)
    first_order_sweep_forward(ws, advection_split(1.0), g, 2 * g.h, bc)
    rec = first_order_sweep_backward(ws, advection_split(1.0), g, 2 * g.h, bc)
    assert rec.skipped
    np.testing.assert_array_equal(ws.u_new, ws.u_half)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 32), st.floats(0.1, 20), st.integers(0, 2 ** 31))
def test_linear_advection_oracle(I, C, seed):
    g = build_grid(0, 1, I)
    u0 = np.random.default_rng(seed).uniform(-1, 1, I + 1)
    bc = BoundaryPolicy(Side.DIRICHLET, Side.EXTRAPOLATE, lambda x, t: 0.25)
    ws = _ws(u0, bc, g)
    first_order_sweep_forward(ws, advection_split(1.0), g, C * g.h, bc)
    ref = np.empty(I + 1)
    ref[0] = 0.25
    for i in range(1, I + 1):
        ref[i] = (u0[i] + C * ref[i - 1]) / (1 + C)
    np.testing.assert_allclose(ws.u_half, ref, rtol=0, atol=1e-12)


def test_burgers_forward_sweep_equals_one_step_implicit_scheme():
    # full implicit upwind system solved globally by Newton as an independent oracle
    I = 10
    g = build_grid(0, 1, I)
    lam = 3.0
    rng = np.random.default_rng(3)
    u0 = rng.uniform(0.2, 1.5, I + 1)
    left = 0.9
    bc = BoundaryPolicy(Side.DIRICHLET, Side.EXTRAPOLATE, lambda x, t: left)
    ws = _ws(u0, bc, g)
    first_order_sweep_forward(ws, burgers_split(), g, lam * g.h, bc)
    u = u0.copy()
    u[0] = left
    for _ in range(50):
        v = np.concatenate([[left], u[1:]])
        F = v[1:] + lam * (v[1:] ** 2 / 2 - v[:-1] ** 2 / 2) - u0[1:]
        J = np.diag(1 + lam * v[1:]) - np.diag(lam * v[1:-1], -1)
        u[1:] -= np.linalg.solve(J, F)
    np.testing.assert_allclose(ws.u_half, u, atol=1e-12)


def test_local_courant_examples():
    lin = advection_split(1.0)
    assert local_courant(0.3, -2.0, lin) == 1
    b = burgers_split()
    assert local_courant(2.0, 0.0, b) == pytest.approx(1.0)
    assert local_courant(3.0, 3.0, b) == 3.0


CONSTANT_CASES = [
    ("advection", advection_split(1.0), 0.37),
    ("burgers+", burgers_split(), 0.7),
    ("burgers-", burgers_split(), -0.5),
]


@pytest.mark.parametrize("scheme", list(SCHEMES))
@pytest.mark.parametrize("label, s, c", CONSTANT_CASES, ids=[c[0] for c in CONSTANT_CASES])
def test_constant_state_preserved(scheme, label, s, c):
    g = build_grid(0, 1, 32)
    bc = BoundaryPolicy.exact_dirichlet(lambda x, t: c)
    u = np.full(33, c)
    for n in range(3):
        u, _ = step_scalar(u, s, g, 3 * g.h, SCHEMES[scheme], bc, (n + 1) * 3 * g.h)
    np.testing.assert_allclose(u, c, atol=1e-12)


@given(st.floats(0, 1))
def test_fixed_omega_constant_state(omega):
    g = build_grid(0, 1, 16)
    bc = BoundaryPolicy.exact_dirichlet(lambda x, t: 1.1)
    ws = _ws(np.full(17, 1.1), bc, g)
    fixed_omega_step(ws, burgers_split(), g, 2 * g.h, omega, bc)
    np.testing.assert_allclose(ws.u_new, 1.1, atol=1e-12)


@pytest.mark.parametrize("name", ["balsara", "burgers-shock-rarefaction", "burgers-slow-shock"])
def test_discrete_conservation(name, any_cfg):
    p = get_problem(name)
    I = {"balsara": 100, "burgers-shock-rarefaction": 80, "burgers-slow-shock": 40}[name]
    _, traj = run_named(name, I, any_cfg, N=6)
    scale = max(1.0, max(np.max(np.abs(f)) for f in traj.fields))
    assert max(abs(r) for r in traj.mass_residual) <= 1e-10 * scale


def test_zero_steps_returns_initial():
    p = get_problem("burgers-smooth")
    g = build_grid(0, 1, 40)
    traj = run_scalar(p, g, TimeStepping(4 * g.h, 0))
    assert len(traj.fields) == 1
    np.testing.assert_array_equal(traj.fields[0], p.initial(g.x))


def test_rotated_balsara_stays_comparable_to_initial():
    p, traj = run_named("balsara", 200, SCHEMES["hires"], N=50)
    _, fo = run_named("balsara", 200, SCHEMES["first-order"], N=50)
    assert traj.rotate_cells == 4
    np.testing.assert_allclose(traj.sample_points(50), traj.grid.x + 2.0)
    # 50 steps of 4 cells each is one full period
    def err(t):
        return np.abs(t.final - p.initial(t.grid.x)).sum() * t.grid.h
    assert err(traj) < 0.5 * err(fo)


def test_hires_tvd_with_converged_corrector():
    cfg = SolverConfig(max_corrector_iters=200, corrector_stop_tol=1e-12)
    _, traj = run_named("balsara", 200, cfg, N=50)
    assert np.max(traj.tv_increase) <= 1e-10


def test_hires_tvd_single_corrector_bounded():
    _, traj = run_named("balsara", 200, SolverConfig(), N=50)
    assert np.max(traj.tv_increase) <= 1e-8


def test_flat_upwind_data_reduces_to_first_order():
    # all upwind differences vanish, so every node takes the gated first-order flux
    g = build_grid(0, 1, 16)
    bc = BoundaryPolicy.exact_dirichlet(lambda x, t: 0.5)
    u0 = np.full(17, 0.5)
    u0[10:] = 0.2
    fo, _ = step_scalar(u0, advection_split(1.0), g, 2 * g.h, SCHEMES["first-order"], bc, 1.0)
    hr, info = step_scalar(u0, advection_split(1.0), g, 2 * g.h, SCHEMES["hires"], bc, 1.0)
    np.testing.assert_allclose(hr[:10], fo[:10], atol=1e-14)
    assert np.all(info.records[0].omega[1:10] == 1)


def test_fixed_omega_table_values():
    _, t1 = run_named("burgers-smooth", 40, SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=1.0))
    from sweepcl.harness import error_l1
    p = get_problem("burgers-smooth")
    assert rel(error_l1(t1, p.exact), 0.00342) <= 0.10
    _, t0 = run_named("burgers-smooth", 80, SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.0))
    assert rel(error_l1(t0, p.exact), 0.00428) <= 0.10


def test_slow_shock_hires_beats_first_order():
    from sweepcl.harness import error_l1
    p = get_problem("burgers-slow-shock")
    _, fo = run_named("burgers-slow-shock", 20, SCHEMES["first-order"])
    _, hr = run_named("burgers-slow-shock", 20, SCHEMES["hires"])
    assert error_l1(hr, p.exact) < error_l1(fo, p.exact)
