"""HiGHS-backed engine (via scipy.optimize) for large instances.

Produces the same SolveResult surface as the bundled simplex; used when
scenario counts push models beyond what a dense tableau should handle.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog
from scipy.optimize import milp as scipy_milp

from .model import (EQ, GE, LE, LinearModel, SolveResult, SolverStatus,
                    Tolerances)

_LP_STATUS = {
    0: SolverStatus.OPTIMAL,
    1: SolverStatus.ITERATION_LIMIT,
    2: SolverStatus.INFEASIBLE,
    3: SolverStatus.UNBOUNDED,
    4: SolverStatus.ITERATION_LIMIT,
}


def solve_lp_highs(model: LinearModel, tol: Tolerances | None = None) -> SolveResult:
    if not model.sealed:
        raise ValueError("model must be sealed before solving")
    tol = tol or Tolerances()
    c, A, senses, b, lb, ub, _ = model.to_arrays()
    le_rows = [i for i, s in enumerate(senses) if s == LE]
    ge_rows = [i for i, s in enumerate(senses) if s == GE]
    eq_rows = [i for i, s in enumerate(senses) if s == EQ]
    kw = {}
    ub_rows = le_rows + ge_rows
    if ub_rows:
        A_ub = np.vstack([A[le_rows], -A[ge_rows]]) if ge_rows else A[le_rows]
        b_ub = np.concatenate([b[le_rows], -b[ge_rows]])
        kw["A_ub"], kw["b_ub"] = A_ub, b_ub
    if eq_rows:
        kw["A_eq"], kw["b_eq"] = A[eq_rows], b[eq_rows]
    res = linprog(c, bounds=np.column_stack([lb, ub]), method="highs",
                  options={"primal_feasibility_tolerance": max(tol.feas, 1e-10),
                           "dual_feasibility_tolerance": max(tol.opt, 1e-10)},
                  **kw)
    status = _LP_STATUS.get(res.status, SolverStatus.ITERATION_LIMIT)
    if status is not SolverStatus.OPTIMAL:
        return SolveResult(status, message=str(res.message))
    primal = {v.name: float(res.x[j]) for j, v in enumerate(model.variables)}
    duals: dict[str, float] = {}
    if ub_rows:
        marg = res.ineqlin.marginals
        for k, i in enumerate(le_rows):
            duals[model.constraints[i].name] = float(marg[k])
        for k, i in enumerate(ge_rows):
            duals[model.constraints[i].name] = float(-marg[len(le_rows) + k])
    if eq_rows:
        for k, i in enumerate(eq_rows):
            duals[model.constraints[i].name] = float(res.eqlin.marginals[k])
    return SolveResult(SolverStatus.OPTIMAL,
                       float(res.fun) + model.objective_offset,
                       primal, duals, gap=0.0,
                       iterations=int(getattr(res, "nit", 0)))


def solve_milp_highs(model: LinearModel, tol: Tolerances | None = None, *,
                     node_limit: int | None = None,
                     time_limit: float | None = None) -> SolveResult:
    if not model.sealed:
        raise ValueError("model must be sealed before solving")
    tol = tol or Tolerances()
    c, A, senses, b, lb, ub, binary = model.to_arrays()
    if not binary.any():
        return solve_lp_highs(model, tol)
    lo = np.where([s == LE for s in senses], -np.inf, b)
    hi = np.where([s == GE for s in senses], np.inf, b)
    constraints = [LinearConstraint(A, lo, hi)] if len(b) else []
    options = {"mip_rel_gap": tol.gap_rel}
    if node_limit is not None:
        options["node_limit"] = int(node_limit)
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = scipy_milp(c, constraints=constraints,
                     integrality=binary.astype(int),
                     bounds=Bounds(lb, ub), options=options)
    if res.status == 2:
        return SolveResult(SolverStatus.INFEASIBLE, message=str(res.message))
    if res.status == 3:
        return SolveResult(SolverStatus.UNBOUNDED, message=str(res.message))
    if res.x is None:
        status = (SolverStatus.TIME_LIMIT if time_limit is not None
                  else SolverStatus.ITERATION_LIMIT)
        return SolveResult(status, message=str(res.message))
    primal = {v.name: float(res.x[j]) for j, v in enumerate(model.variables)}
    gap = float(res.mip_gap) if res.mip_gap is not None else math.nan
    status = SolverStatus.OPTIMAL if res.status == 0 else (
        SolverStatus.TIME_LIMIT if time_limit is not None
        else SolverStatus.ITERATION_LIMIT)
    return SolveResult(status, float(res.fun) + model.objective_offset,
                       primal, duals=None, gap=gap,
                       iterations=int(getattr(res, "mip_node_count", 0) or 0))
