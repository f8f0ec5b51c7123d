"""Slow shock at Courant 10: error and shock position at t=1."""
import numpy as np

from sweepcl import Scheme, SolverConfig, TimeStepping, build_grid, get_problem, simulate
from sweepcl.harness import error_l1

if __name__ == "__main__":
    p = get_problem("burgers-slow-shock")
    for I in (20, 40):
        g = build_grid(*p.domain, I)
        ts = TimeStepping.from_ratio(g, 0.5, 1.0)
        for label, cfg in (("first-order", SolverConfig(scheme=Scheme.FIRST_ORDER)),
                           ("hires", SolverConfig())):
            tr = simulate(p, g, ts, cfg)
            d = tr.final - 1.0
            k = int(np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0))[0])
            xs = g.x[k] + d[k] / (d[k] - d[k + 1]) * g.h
            print(f"I={I:3d} N={ts.N:3d} {label:12s} E={error_l1(tr, p.exact):.4f} shock at {xs:.3f}")
