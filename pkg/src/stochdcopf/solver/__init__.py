"""Integer-capable linear optimization engine with swappable backends."""

from .backends import (HighsBackend, SimplexBackend, get_backend, solve_lp,
                       solve_milp)
from .model import (EQ, GE, LE, Constraint, LinearModel, ModelError,
                    SolveResult, SolverStatus, Tolerances, Variable,
                    fix_binaries, relax_binaries)
from .mps import write_mps

__all__ = [
    "LE", "EQ", "GE",
    "Constraint", "Variable", "LinearModel", "ModelError",
    "SolveResult", "SolverStatus", "Tolerances",
    "relax_binaries", "fix_binaries",
    "solve_lp", "solve_milp", "get_backend",
    "SimplexBackend", "HighsBackend",
    "write_mps",
]
