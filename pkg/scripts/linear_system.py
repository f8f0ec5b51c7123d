"""Linear 2x2 system at Courant 10: component ranges against the exact solution."""
from sweepcl import SolverConfig, TimeStepping, build_grid, get_problem, simulate

if __name__ == "__main__":
    p = get_problem("linear-system")
    for I in (400, 800):
        g = build_grid(*p.domain, I)
        tr = simulate(p, g, TimeStepping.from_ratio(g, 10.0, 0.4), SolverConfig())
        for t in (0.15, 0.4):
            n = int(round(t / tr.ts.tau))
            q, ex = tr.fields[n], p.exact(g.x, n * tr.ts.tau)
            print(f"I={I} t={t}: q range [{q.min():+.4f}, {q.max():.4f}], "
                  f"exact range [{ex.min():+.4f}, {ex.max():.4f}], "
                  f"l1 at t = {g.h * abs(q - ex).sum():.4f}")
