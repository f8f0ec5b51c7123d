"""Four-profile advection at Courant 4: extrema, TV and l1 error at t=2."""
import numpy as np

from sweepcl import Scheme, SolverConfig, TimeStepping, build_grid, get_problem, simulate

if __name__ == "__main__":
    p = get_problem("balsara")
    for I in (500, 1000):
        g = build_grid(*p.domain, I)
        ts = TimeStepping.from_ratio(g, 4.0, 2.0)
        for label, cfg in (("first-order", SolverConfig(scheme=Scheme.FIRST_ORDER)),
                           ("hires", SolverConfig())):
            tr = simulate(p, g, ts, cfg)
            u = tr.final
            err = g.h * np.abs(u - p.exact(tr.sample_points(ts.N), ts.t_end)).sum()
            print(f"I={I:5d} {label:12s} min={u.min():+.3e} max={u.max():.6f} "
                  f"max dTV={np.max(tr.tv_increase):+.2e} l1={err:.5f}")
