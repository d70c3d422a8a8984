"""Branch-and-bound over binary variables on top of the bundled simplex.

Best-bound node selection, branching on the most fractional binary, and
child LPs warm-started from the parent basis. Node processing order is
fully deterministic (ties broken by insertion counter), so identical
models yield identical results.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time

from .model import LinearModel, SolveResult, SolverStatus, Tolerances
from .simplex import Basis, solve_lp_simplex


def solve_milp_bb(model: LinearModel, tol: Tolerances | None = None, *,
                  node_limit: int | None = None,
                  time_limit: float | None = None) -> SolveResult:
    if not model.sealed:
        raise ValueError("model must be sealed before solving")
    tol = tol or Tolerances()
    binaries = model.binary_names
    if not binaries:
        out = solve_lp_simplex(model, tol, want_duals=True)
        return out.result

    t_start = time.monotonic()
    root = solve_lp_simplex(model, tol, want_duals=False)
    if root.result.status is SolverStatus.INFEASIBLE:
        return SolveResult(SolverStatus.INFEASIBLE)
    if root.result.status is SolverStatus.UNBOUNDED:
        return SolveResult(SolverStatus.UNBOUNDED,
                           message="LP relaxation is unbounded")
    if root.result.status is not SolverStatus.OPTIMAL:
        return root.result

    counter = itertools.count()
    # Heap entries: (parent LP bound, tiebreak, fixed-binary overrides, basis)
    heap: list[tuple[float, int, dict, Basis | None]] = []
    heapq.heappush(heap, (root.result.objective, next(counter), {}, None))

    incumbent: SolveResult | None = None
    incumbent_obj = math.inf
    nodes = 0
    limit_status: SolverStatus | None = None

    while heap:
        bound, _, fixed, warm = heapq.heappop(heap)
        if bound >= incumbent_obj - _prune_eps(incumbent_obj, tol):
            continue
        if node_limit is not None and nodes >= node_limit:
            limit_status = SolverStatus.ITERATION_LIMIT
            break
        if time_limit is not None and time.monotonic() - t_start > time_limit:
            limit_status = SolverStatus.TIME_LIMIT
            break
        nodes += 1

        overrides = {name: (float(v), float(v)) for name, v in fixed.items()}
        out = solve_lp_simplex(model, tol, bound_overrides=overrides,
                               warm_start=warm, want_duals=False)
        res = out.result
        if res.status is SolverStatus.INFEASIBLE:
            continue
        if res.status is not SolverStatus.OPTIMAL:
            limit_status = res.status
            break
        if res.objective >= incumbent_obj - _prune_eps(incumbent_obj, tol):
            continue

        frac_name, frac_dist = _most_fractional(res.primal, binaries, fixed)
        if frac_dist <= tol.integrality:
            incumbent = res
            incumbent_obj = res.objective
            continue
        for val in (0, 1):
            child = dict(fixed)
            child[frac_name] = val
            heapq.heappush(heap, (res.objective, next(counter), child, out.basis))

    best_bound = min((entry[0] for entry in heap), default=incumbent_obj)
    best_bound = min(best_bound, incumbent_obj)
    if incumbent is None:
        if limit_status is not None:
            return SolveResult(limit_status, message="no incumbent found")
        return SolveResult(SolverStatus.INFEASIBLE)

    gap = (incumbent_obj - best_bound) / max(1e-10, abs(incumbent_obj))
    status = limit_status if limit_status is not None else SolverStatus.OPTIMAL
    return SolveResult(status, incumbent_obj, dict(incumbent.primal),
                       duals=None, gap=max(gap, 0.0), iterations=nodes)


def _prune_eps(incumbent_obj, tol: Tolerances) -> float:
    if not math.isfinite(incumbent_obj):
        return 0.0
    return max(1e-9, abs(incumbent_obj) * tol.gap_rel)


def _most_fractional(primal, binaries, fixed):
    worst_name, worst = binaries[0], -1.0
    for name in binaries:
        if name in fixed:
            continue
        v = primal[name]
        dist = min(abs(v), abs(v - 1.0))
        if dist > worst + 1e-15:
            worst, worst_name = dist, name
    return worst_name, worst
