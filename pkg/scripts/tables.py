"""Print both Burgers convergence tables next to the reference values."""
from sweepcl import Scheme, SolverConfig, convergence_study

TABLE1 = {
    "first-order": (SolverConfig(scheme=Scheme.FIRST_ORDER), [0.04214, 0.02525, 0.01419, 0.00768]),
    "omega=0": (SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.0), [0.01357, 0.00428, None, None]),
    "omega=0.5": (SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=0.5), None),
    "omega=1": (SolverConfig(scheme=Scheme.FIXED_OMEGA, omega=1.0), [0.00342, 0.00091, 0.00021, 0.00005]),
}
TABLE2 = {
    "hires": (SolverConfig(), [0.01042, 0.00564, 0.00314, 0.00175]),
    "first-order": (SolverConfig(scheme=Scheme.FIRST_ORDER), [0.0374, 0.0235, 0.0144, 0.0087]),
}


def show(problem, cells, table):
    print(problem)
    for label, (cfg, ref) in table.items():
        reps = convergence_study(problem, None, cells, 4.0, cfg, workers=4)
        for k, r in enumerate(reps):
            pub = "" if not ref or ref[k] is None else f"  reference {ref[k]:.5f}"
            order = "" if r.eoc is None else f"{r.eoc:5.2f}"
            print(f"  {label:12s} I={r.I:5d} E={r.e_l1:.5f} eoc={order:5s}{pub}")


if __name__ == "__main__":
    show("burgers-smooth", [40, 80, 160, 320], TABLE1)
    show("burgers-shock-rarefaction", [160, 320, 640, 1280], TABLE2)
