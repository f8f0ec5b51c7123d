"""Shock-rarefaction HR error under scheme variants against the reference column."""
from sweepcl import SolverConfig, convergence_study

VARIANTS = {
    "default": SolverConfig(),
    "3 correctors": SolverConfig(max_corrector_iters=3),
    "local Courant": SolverConfig(use_local_courant=True),
    "eps 1e-8": SolverConfig(epsilon_scale=1e-8),
}

if __name__ == "__main__":
    print("reference     0.01042 0.00564 0.00314 0.00175")
    for label, cfg in VARIANTS.items():
        reps = convergence_study("burgers-shock-rarefaction", None, [160, 320, 640, 1280], 4.0,
                                 cfg, workers=4)
        print(f"{label:13s} " + " ".join(f"{r.e_l1:.5f}" for r in reps))
