"""Shallow water hump: Courant number, mass balance and splitting audit."""
import numpy as np

from sweepcl import SolverConfig, TimeStepping, audit_monotonicity, build_grid, get_problem, simulate

if __name__ == "__main__":
    p = get_problem("shallow-water")
    for I in (400, 800):
        g = build_grid(*p.domain, I)
        tr = simulate(p, g, TimeStepping.from_ratio(g, 5.0, 2.0), SolverConfig())
        states = np.concatenate(tr.fields)
        res = np.abs(np.array(tr.mass_residual)[:, 0]).max()
        print(f"I={I}: max Courant {max(tr.char_courant):.2f}, max |mass residual| {res:.1e}, "
              f"h in [{tr.final[:, 0].min():.4f}, {tr.final[:, 0].max():.4f}]")
        for a in (1.3, 1.2):
            rep = audit_monotonicity(get_problem("shallow-water", alpha=a).splitting, states)
            print(f"    alpha={a}: {rep.violations} violations")
