"""Acceptance criteria 1-8, each at its stated tolerance."""
import numpy as np
import pytest

from sweepcl import (BoundaryPolicy, Scheme, SolverConfig, TestProblem, TimeStepping, build_grid,
                     convergence_study, get_problem, simulate)
from sweepcl.flux import advection_split, audit_monotonicity
from sweepcl.harness import error_l1
from sweepcl.limiter import limiter_params, tvd_inequalities_hold
from sweepcl.problems import balsara_advection
from sweepcl.scalar_solver import run_scalar, solve_node_scalar, step_scalar

import test_scalar_solver as tss
import test_system_solver as tsys
from conftest import SCHEMES, rel, verdict

FO = SolverConfig(scheme=Scheme.FIRST_ORDER)
HR = SolverConfig()


def _errors(reps):
    return [r.e_l1 for r in reps], [r.eoc for r in reps[1:]]


def _fmt(v):
    return "[" + ", ".join(f"{x:.5g}" for x in v) + "]"


def test_criterion_1_smooth_burgers_orders():
    cells = [40, 80, 160, 320]
    fo, fo_eoc = _errors(convergence_study("burgers-smooth", None, cells, 4.0, FO, workers=4))
    w1, w1_eoc = _errors(convergence_study(
        "burgers-smooth", None, cells, 4.0, SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=1.0),
        workers=4))
    ok = (all(rel(e, r) <= 0.10 for e, r in zip(fo, [0.04214, 0.02525, 0.01419, 0.00768]))
          and all(rel(e, r) <= 0.10 for e, r in zip(w1, [0.00342, 0.00091, 0.00021, 0.00005]))
          and all(abs(e - r) <= 0.15 for e, r in zip(fo_eoc, [0.74, 0.83, 0.89]))
          and all(abs(e - r) <= 0.15 for e, r in zip(w1_eoc, [1.91, 2.08, 2.17])))
    verdict(1, ok, f"FO {_fmt(fo)} eoc {_fmt(fo_eoc)}; omega=1 {_fmt(w1)} eoc {_fmt(w1_eoc)}")
    assert ok


def test_criterion_2_shock_rarefaction_orders():
    cells = [160, 320, 640, 1280]
    hr, hr_eoc = _errors(convergence_study("burgers-shock-rarefaction", None, cells, 4.0, HR,
                                           workers=4))
    fo, fo_eoc = _errors(convergence_study("burgers-shock-rarefaction", None, cells, 4.0, FO,
                                           workers=4))
    ok_hr = (all(rel(e, r) <= 0.10 for e, r in zip(hr, [0.01042, 0.00564, 0.00314, 0.00175]))
             and all(0.75 <= e <= 0.95 for e in hr_eoc))
    ok_fo = (all(rel(e, r) <= 0.10 for e, r in zip(fo, [0.0374, 0.0235, 0.0144, 0.0087]))
             and all(0.60 <= e <= 0.80 for e in fo_eoc))
    verdict(2, ok_hr and ok_fo, f"HR {_fmt(hr)} eoc {_fmt(hr_eoc)} ({'ok' if ok_hr else 'off'}); "
                                f"FO {_fmt(fo)} eoc {_fmt(fo_eoc)} ({'ok' if ok_fo else 'off'})")
    assert ok_hr and ok_fo


def _final_l1(p, tr):
    n = tr.ts.N
    return tr.grid.h * np.abs(tr.final - p.exact(tr.sample_points(n), n * tr.ts.tau)).sum()


def test_criterion_3_balsara_tvd():
    p = get_problem("balsara")
    conv = SolverConfig(max_corrector_iters=500, corrector_stop_tol=1e-12)
    details, ok = [], True
    for I, N in ((500, 125), (1000, 250)):
        g = build_grid(*p.domain, I)
        ts = TimeStepping(4 * g.h, N)
        hr = simulate(p, g, ts, HR)
        fo = simulate(p, g, ts, FO)
        hc = simulate(p, g, ts, conv)
        ex = max(max(0.0, f.max() - 1.0) + max(0.0, -f.min()) for f in hr.fields + hc.fields)
        dtv = float(np.max(hc.tv_increase))
        e_hr, e_fo = _final_l1(p, hr), _final_l1(p, fo)
        ok &= ex <= 1e-8 and dtv <= 1e-10 and e_hr < e_fo
        details.append(f"I={I}: excess {ex:.2e}, max dTV {dtv:.2e}, l1 HR {e_hr:.4f} < FO {e_fo:.4f}")
    verdict(3, ok, "; ".join(details))
    assert ok


def test_criterion_4_large_courant_stability():
    worst, ok = -np.inf, True
    for C in (0.5, 1, 4, 10, 100):
        p = balsara_advection(courant=C)
        g = build_grid(*p.domain, 400)
        ts = TimeStepping(C * g.h, 50)
        for cfg in (FO, HR):
            tr = simulate(p, g, ts, cfg)
            m0 = np.abs(tr.fields[0]).max()
            growth = max(np.abs(f).max() for f in tr.fields) - m0
            finite = all(np.all(np.isfinite(f)) for f in tr.fields)
            ok &= finite and growth <= 1e-8
            worst = max(worst, growth)
    verdict(4, ok, f"max-norm growth over initial at most {worst:.2e} for C in 0.5..100")
    assert ok


def _shock_location(x, u):
    d = u - 1.0
    k = int(np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0))[0])
    return x[k] + d[k] / (d[k] - d[k + 1]) * (x[k + 1] - x[k])


def test_criterion_5_slow_shock():
    p = get_problem("burgers-slow-shock")
    ok, details = True, []
    for I in (20, 40):
        g = build_grid(*p.domain, I)
        ts = TimeStepping.from_ratio(g, 0.5, 1.0)
        e_hr = error_l1(hr := simulate(p, g, ts, HR), p.exact)
        e_fo = error_l1(simulate(p, g, ts, FO), p.exact)
        xs = _shock_location(g.x, hr.final)
        ok &= e_hr < e_fo and abs(xs - 0.5) <= 2 * g.h
        details.append(f"I={I}: E HR {e_hr:.4f} < FO {e_fo:.4f}, shock at {xs:.3f}")
    verdict(5, ok, "; ".join(details))
    assert ok


def test_criterion_6_linear_system():
    p = get_problem("linear-system")
    lo, hi, ok = np.inf, -np.inf, True
    for I in (400, 800):
        g = build_grid(*p.domain, I)
        tr = simulate(p, g, TimeStepping.from_ratio(g, 10.0, 0.4), HR)
        for t in (0.15, 0.4):
            q = tr.fields[int(round(t / tr.ts.tau))]
            ok &= bool(np.all(np.isfinite(q)))
            lo, hi = min(lo, q.min()), max(hi, q.max())
    ok_range = ok and lo >= -1e-6 and hi <= 0.8 + 1e-6
    ex_min = min(p.exact(np.linspace(0, 1, 2001), t).min() for t in (0.15, 0.4))
    try:
        for cfg in SCHEMES.values():
            tsys.test_linear_system_decouples_into_scalar_advections(cfg)
        ok_dec = True
    except AssertionError:
        ok_dec = False
    verdict(6, ok_range and ok_dec,
            f"range [{lo:.4g}, {hi:.4g}] vs [-1e-6, 0.8+1e-6] (exact min {ex_min:.3g}); "
            f"decoupling oracle {'ok' if ok_dec else 'off'}")
    assert ok_range and ok_dec


def test_criterion_7_shallow_water():
    p = get_problem("shallow-water")
    ok, details, visited = True, [], []
    for I in (400, 800):
        g = build_grid(*p.domain, I)
        tr = simulate(p, g, TimeStepping.from_ratio(g, 5.0, 2.0), HR)
        mass = np.array(tr.mass)[:-1, 0]
        res = np.abs(np.array(tr.mass_residual)[:, 0]) / mass
        visited.append(np.concatenate(tr.fields))
        ok &= tr.ts.N == len(tr.fields) - 1 and float(res.max()) <= 1e-9
        details.append(f"I={I}: max rel mass residual {res.max():.1e}, "
                       f"max Courant {max(tr.char_courant):.2f}")
    states = np.concatenate(visited)
    a13 = audit_monotonicity(get_problem("shallow-water", alpha=1.3).splitting, states)
    a12 = audit_monotonicity(get_problem("shallow-water", alpha=1.2).splitting, states)
    ok &= a13.ok and a12.violations >= 1
    details.append(f"audit violations alpha=1.3: {a13.violations}, alpha=1.2: {a12.violations}")
    verdict(7, ok, "; ".join(details))
    assert ok


def test_criterion_8_invariant_suites():
    checks = {}

    rng = np.random.default_rng(8)
    n = 100_000
    C = 1.0 + rng.exponential(5.0, n)
    r1, r2 = rng.standard_cauchy(n) * 3, rng.standard_cauchy(n) * 3
    lp0 = rng.uniform(-1.0, 2.0, n)
    bad = 0
    for k in range(n):
        prev = limiter_params(r1[k], C[k], max(lp0[k], -1.0 / C[k]))
        cur = limiter_params(r2[k], C[k], prev.lpsi)
        bad += not tvd_inequalities_hold(prev, cur, r2[k], C[k])
    checks["limiter TVD"] = bad == 0

    def run(fn, *a):
        try:
            fn(*a)
            return True
        except AssertionError:
            return False

    const = True
    for scheme in SCHEMES:
        for label, s, c in tss.CONSTANT_CASES:
            const &= run(tss.test_constant_state_preserved, scheme, label, s, c)
        const &= run(tsys.test_constant_shallow_water_state, SCHEMES[scheme])
        const &= run(_constant_linear_system, SCHEMES[scheme])
    checks["constant states"] = const
    checks["node solver vs bisection"] = run(tss.test_node_solver_matches_bisection)
    checks["m=1 equivalence"] = all(run(tsys.test_m1_system_reproduces_scalar_pipeline, c)
                                    for c in SCHEMES.values())
    checks["conservation"] = all(run(tss.test_discrete_conservation, name, c)
                                 for name in ("balsara", "burgers-shock-rarefaction",
                                              "burgers-slow-shock")
                                 for c in SCHEMES.values())
    ok = all(checks.values())
    verdict(8, ok, ", ".join(f"{k} {'ok' if v else 'off'}" for k, v in checks.items()))
    assert ok


def _constant_linear_system(cfg):
    import dataclasses
    p = get_problem("linear-system")
    c = np.array([0.3, -0.1])
    p = dataclasses.replace(p, initial=lambda x: np.tile(c, (len(x), 1)),
                            boundary=BoundaryPolicy.exact_dirichlet(lambda x, t: c))
    g = build_grid(0, 1, 40)
    tr = simulate(p, g, TimeStepping(10 * g.h, 3), cfg)
    np.testing.assert_allclose(tr.final, np.tile(c, (41, 1)), atol=1e-12)
