"""Engine dispatch: the bundled simplex/branch-and-bound is the reference
implementation; HiGHS (scipy) is the drop-in engine for larger models.
"""

from __future__ import annotations

from .branch_bound import solve_milp_bb
from .highs import solve_lp_highs, solve_milp_highs
from .model import LinearModel, SolveResult, Tolerances
from .simplex import solve_lp_simplex


class SimplexBackend:
    """Bundled exact engine (reference implementation for tests)."""

    name = "bundled"

    def solve_lp(self, model: LinearModel, tol: Tolerances | None = None) -> SolveResult:
        return solve_lp_simplex(model, tol).result

    def solve_milp(self, model: LinearModel, tol: Tolerances | None = None,
                   node_limit: int | None = None,
                   time_limit: float | None = None) -> SolveResult:
        return solve_milp_bb(model, tol, node_limit=node_limit, time_limit=time_limit)


class HighsBackend:
    """scipy/HiGHS engine behind the same interface."""

    name = "highs"

    def solve_lp(self, model: LinearModel, tol: Tolerances | None = None) -> SolveResult:
        return solve_lp_highs(model, tol)

    def solve_milp(self, model: LinearModel, tol: Tolerances | None = None,
                   node_limit: int | None = None,
                   time_limit: float | None = None) -> SolveResult:
        return solve_milp_highs(model, tol, node_limit=node_limit, time_limit=time_limit)


_BACKENDS = {
    "bundled": SimplexBackend(),
    "highs": HighsBackend(),
}


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}")


def solve_lp(model: LinearModel, tol: Tolerances | None = None,
             backend=None) -> SolveResult:
    """Solve an LP; ``backend`` may be a backend object or a registered name."""
    return _resolve(backend).solve_lp(model, tol)


def solve_milp(model: LinearModel, tol: Tolerances | None = None,
               node_limit: int | None = None, time_limit: float | None = None,
               backend=None) -> SolveResult:
    """Solve a MILP to the configured gap, or to a node/time limit."""
    return _resolve(backend).solve_milp(model, tol, node_limit=node_limit,
                                        time_limit=time_limit)


def _resolve(backend):
    if backend is None:
        return _BACKENDS["bundled"]
    if isinstance(backend, str):
        return get_backend(backend)
    return backend
