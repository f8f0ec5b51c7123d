"""Compact implicit high-resolution sweeps for 1D hyperbolic conservation laws."""
from .boundary import BoundaryPolicy, Side
from .core import (CourantBounds, Grid1D, Limiter, Scheme, SolverConfig, TimeStepping,
                   Trajectory, build_grid, extrema_excess, total_variation)
from .flux import (FluxSplitting, SystemSplitting, advection_split, audit_monotonicity,
                   burgers_split, lax_friedrichs_split, system_lax_friedrichs_split)
from .harness import ErrorReport, convergence_study, eoc, error_l1, simulate
from .problems import CATALOG, TestProblem, get_problem
from .scalar_solver import NoBracket, NoConvergence, NodeSolveError, run_scalar, solve_node_scalar
from .system_solver import SingularJacobian, run_system, solve_node_system

__version__ = "0.1.0"

__all__ = [
    "BoundaryPolicy", "Side", "CourantBounds", "Grid1D", "Limiter", "Scheme", "SolverConfig",
    "TimeStepping", "Trajectory", "build_grid", "extrema_excess", "total_variation",
    "FluxSplitting", "SystemSplitting", "advection_split", "audit_monotonicity", "burgers_split",
    "lax_friedrichs_split", "system_lax_friedrichs_split", "ErrorReport", "convergence_study",
    "eoc", "error_l1", "simulate", "CATALOG", "TestProblem", "get_problem", "NoBracket",
    "NoConvergence", "NodeSolveError", "run_scalar", "solve_node_scalar", "SingularJacobian",
    "run_system", "solve_node_system",
]
