"""Bounded-variable primal simplex solving LinearModel instances exactly.

Dense revised simplex with an explicitly maintained basis inverse,
two-phase start (artificials only on rows whose slack start is
infeasible), Dantzig pricing with a Bland's-rule fallback against cycling,
and row equilibration. Intended for desk-scale models; larger instances
should go through the HiGHS backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (EQ, GE, LE, LinearModel, SolveResult, SolverStatus,
                    Tolerances)

_AT_LB, _AT_UB, _BASIC, _FREE = 0, 1, 2, 3

_REFACTOR_EVERY = 100


@dataclass
class Basis:
    """Restart information for warm-started re-solves."""

    basic: np.ndarray    # column index of the basic variable per row
    status: np.ndarray   # per-column status code


@dataclass
class SimplexOutcome:
    result: SolveResult
    basis: Basis | None = None


def solve_lp_simplex(model: LinearModel, tol: Tolerances | None = None, *,
                     bound_overrides: dict[str, tuple[float, float]] | None = None,
                     warm_start: Basis | None = None,
                     iteration_limit: int | None = None,
                     want_duals: bool = True) -> SimplexOutcome:
    """Solve the LP given by ``model`` (binary flags are ignored).

    Returned duals follow the convention ``y[row] = d(objective)/d(rhs)``:
    nonnegative for >= rows, nonpositive for <= rows, free for equalities.
    """
    if not model.sealed:
        raise ValueError("model must be sealed before solving")
    tol = tol or Tolerances()
    std = _Standardized(model, bound_overrides)
    if std.bad_bounds:
        return SimplexOutcome(SolveResult(
            SolverStatus.INFEASIBLE, message="conflicting bound overrides"))
    if std.const_row_violation is not None:
        name, amount = std.const_row_violation
        return SimplexOutcome(SolveResult(
            SolverStatus.INFEASIBLE,
            message=f"constant constraint {name} violated by {amount:.3e}"))
    sx = _Simplex(std, tol, iteration_limit)
    return sx.run(model, warm_start, want_duals)


class _Standardized:
    """min c x  s.t.  A x + s = b, lb <= (x, s) <= ub, rows equilibrated."""

    def __init__(self, model: LinearModel, bound_overrides):
        c, A, senses, b, lb, ub, _ = model.to_arrays()
        if bound_overrides:
            for name, (lo, hi) in bound_overrides.items():
                j = model.var_index(name)
                lb[j], ub[j] = lo, hi
        self.bad_bounds = bool(np.any(lb > ub))

        # Constant rows (no variables, or all-zero coefficients) are checked
        # directly and dropped from the tableau.
        keep, self.dropped_names = [], []
        self.const_row_violation = None
        row_norm = np.abs(A).max(axis=1, initial=0.0)
        for i, con in enumerate(model.constraints):
            if row_norm[i] == 0.0:
                self.dropped_names.append(con.name)
                viol = _sense_violation(senses[i], 0.0, b[i])
                if viol > 1e-9 and self.const_row_violation is None:
                    self.const_row_violation = (con.name, viol)
            else:
                keep.append(i)
        self.kept_rows = keep
        A = A[keep]
        b = b[keep]
        self.senses = [senses[i] for i in keep]
        self.row_names = [model.constraints[i].name for i in keep]

        self.row_scale = np.abs(A).max(axis=1, initial=0.0)
        self.row_scale[self.row_scale == 0.0] = 1.0
        A = A / self.row_scale[:, None]
        b = b / self.row_scale

        m, n = A.shape
        self.n_struct = n
        self.m = m
        slack_lb = np.empty(m)
        slack_ub = np.empty(m)
        for i, sense in enumerate(self.senses):
            if sense == LE:
                slack_lb[i], slack_ub[i] = 0.0, math.inf
            elif sense == GE:
                slack_lb[i], slack_ub[i] = -math.inf, 0.0
            else:
                slack_lb[i], slack_ub[i] = 0.0, 0.0
        self.A = np.hstack([A, np.eye(m)]) if m else np.zeros((0, n))
        self.b = b
        self.c = np.concatenate([c, np.zeros(m)])
        self.lb = np.concatenate([lb, slack_lb])
        self.ub = np.concatenate([ub, slack_ub])


def _sense_violation(sense, lhs, rhs):
    if sense == LE:
        return lhs - rhs
    if sense == GE:
        return rhs - lhs
    return abs(lhs - rhs)


class _Simplex:
    def __init__(self, std: _Standardized, tol: Tolerances, iteration_limit):
        self.std = std
        self.tol = tol
        self.m = std.m
        self.ncols = std.A.shape[1]
        self.n_real = self.ncols  # columns before any artificials
        self.ptol = 1e-10
        self.iteration_limit = iteration_limit or (10000 + 100 * (self.m + self.ncols))
        self.iterations = 0

    # -- state helpers -------------------------------------------------------

    def _start_value(self, j):
        lb, ub = self.std.lb[j], self.std.ub[j]
        if math.isfinite(lb):
            return lb, _AT_LB
        if math.isfinite(ub):
            return ub, _AT_UB
        return 0.0, _FREE

    def _nonbasic_values(self):
        vals = np.where(self.vstatus == _AT_UB, self.std.ub, self.std.lb)
        vals = np.where(self.vstatus == _FREE, 0.0, vals)
        vals[~np.isfinite(vals)] = 0.0
        return vals

    def _recompute_xb(self):
        vals = self._nonbasic_values()
        vals[self.basic] = 0.0
        rhs = self.std.b - self.std.A @ vals
        self.xb = self.binv @ rhs

    def _refactorize(self):
        B = self.std.A[:, self.basic]
        self.binv = np.linalg.inv(B)
        self._recompute_xb()

    # -- main entry ----------------------------------------------------------

    def run(self, model, warm_start, want_duals) -> SimplexOutcome:
        if self.m == 0:
            return self._finish_no_rows(model, want_duals)
        started = warm_start is not None and self._try_warm_start(warm_start)
        if not started:
            infeasible = self._cold_start()
            if infeasible is not None:
                return SimplexOutcome(infeasible)
        # Phase 2 on the (possibly warm) feasible basis.
        status = self._iterate(self.std.c)
        if status is SolverStatus.UNBOUNDED:
            return SimplexOutcome(SolveResult(
                SolverStatus.UNBOUNDED, iterations=self.iterations))
        if status is SolverStatus.ITERATION_LIMIT:
            return SimplexOutcome(SolveResult(
                SolverStatus.ITERATION_LIMIT, iterations=self.iterations,
                message="simplex iteration limit"))
        return self._extract(model, want_duals)

    def _finish_no_rows(self, model, want_duals):
        # Pure bound-constrained objective: each variable sits at the
        # cheaper finite bound.
        n = self.std.n_struct
        x = np.zeros(n)
        for j in range(n):
            lo, hi, cj = self.std.lb[j], self.std.ub[j], self.std.c[j]
            if cj > 0:
                if not math.isfinite(lo):
                    return SimplexOutcome(SolveResult(SolverStatus.UNBOUNDED))
                x[j] = lo
            elif cj < 0:
                if not math.isfinite(hi):
                    return SimplexOutcome(SolveResult(SolverStatus.UNBOUNDED))
                x[j] = hi
            else:
                x[j] = min(max(0.0, lo), hi) if math.isfinite(lo) or math.isfinite(hi) else 0.0
        obj = float(self.std.c[:n] @ x) + model.objective_offset
        primal = {v.name: float(x[j]) for j, v in enumerate(model.variables)}
        duals = {con.name: 0.0 for con in model.constraints} if want_duals else None
        return SimplexOutcome(
            SolveResult(SolverStatus.OPTIMAL, obj, primal, duals, gap=0.0),
            Basis(np.empty(0, dtype=int), np.full(self.ncols, _AT_LB, dtype=np.int8)))

    # -- starting bases ------------------------------------------------------

    def _try_warm_start(self, warm: Basis) -> bool:
        if warm.basic.shape != (self.m,) or warm.status.shape != (self.ncols,):
            return False
        if warm.basic.size and int(warm.basic.max()) >= self.ncols:
            return False
        self.basic = warm.basic.copy()
        self.vstatus = warm.status.copy()
        # Nonbasic statuses may point at bounds that no longer exist.
        for j in range(self.ncols):
            if self.vstatus[j] == _BASIC:
                continue
            lo, hi = self.std.lb[j], self.std.ub[j]
            if self.vstatus[j] == _AT_LB and not math.isfinite(lo):
                self.vstatus[j] = _AT_UB if math.isfinite(hi) else _FREE
            elif self.vstatus[j] == _AT_UB and not math.isfinite(hi):
                self.vstatus[j] = _AT_LB if math.isfinite(lo) else _FREE
        try:
            self._refactorize()
        except np.linalg.LinAlgError:
            return False
        lo = self.std.lb[self.basic]
        hi = self.std.ub[self.basic]
        ok = np.all(self.xb >= lo - self.tol.feas) and np.all(self.xb <= hi + self.tol.feas)
        return bool(ok)

    def _cold_start(self):
        """Slack basis plus artificials on infeasible rows; phase-1 solve."""
        std = self.std
        n_all = self.ncols
        self.vstatus = np.empty(n_all, dtype=np.int8)
        start = np.empty(n_all)
        for j in range(n_all):
            start[j], self.vstatus[j] = self._start_value(j)

        resid = std.b - std.A[:, :std.n_struct] @ start[:std.n_struct]
        art_rows, art_signs = [], []
        basic = np.empty(self.m, dtype=int)
        for i in range(self.m):
            s_col = std.n_struct + i
            lo, hi = std.lb[s_col], std.ub[s_col]
            if lo - self.tol.feas <= resid[i] <= hi + self.tol.feas:
                basic[i] = s_col
            else:
                # Slack pinned at its nearest bound; artificial absorbs the rest.
                pin = min(max(resid[i], lo), hi)
                start[s_col] = pin
                self.vstatus[s_col] = _AT_LB if pin == lo else _AT_UB
                art_rows.append(i)
                art_signs.append(1.0 if resid[i] - pin >= 0 else -1.0)
                basic[i] = -1  # placeholder, filled below

        if not art_rows:
            self.basic = basic
            self.vstatus[self.basic] = _BASIC
            self._refactorize()
            return None

        n_art = len(art_rows)
        art_cols = np.zeros((self.m, n_art))
        for k, (i, sg) in enumerate(zip(art_rows, art_signs)):
            art_cols[i, k] = sg
            basic[i] = n_all + k
        self.std.A = np.hstack([std.A, art_cols])
        self.std.c = np.concatenate([std.c, np.zeros(n_art)])
        self.std.lb = np.concatenate([std.lb, np.zeros(n_art)])
        self.std.ub = np.concatenate([std.ub, np.full(n_art, math.inf)])
        self.vstatus = np.concatenate(
            [self.vstatus, np.full(n_art, _AT_LB, dtype=np.int8)])
        self.ncols = n_all + n_art
        self.basic = basic
        self.vstatus[self.basic] = _BASIC
        self._refactorize()

        phase1_cost = np.zeros(self.ncols)
        phase1_cost[n_all:] = 1.0
        status = self._iterate(phase1_cost)
        if status is SolverStatus.ITERATION_LIMIT:
            return SolveResult(SolverStatus.ITERATION_LIMIT, iterations=self.iterations,
                               message="phase-1 iteration limit")
        art_level = float(phase1_cost[self.basic] @ np.abs(self.xb))
        if art_level > self.tol.feas * max(1.0, float(np.abs(self.std.b).max(initial=0.0))):
            return SolveResult(SolverStatus.INFEASIBLE, iterations=self.iterations)
        self._retire_artificials(n_all)
        return None

    def _retire_artificials(self, n_real):
        """Pivot basic artificials (at zero) out where possible, then fix all
        artificials to zero so phase 2 cannot reuse them."""
        for i in range(self.m):
            j = self.basic[i]
            if j < n_real:
                continue
            row = self.binv[i] @ self.std.A[:, :n_real]
            cands = np.flatnonzero(np.abs(row) > 1e-8)
            swapped = False
            for k in cands:
                if self.vstatus[k] != _BASIC and self.std.lb[k] < self.std.ub[k]:
                    self._pivot(i, int(k), degenerate=True)
                    swapped = True
                    break
            if not swapped:
                # Redundant row: artificial stays basic, pinned at zero.
                self.std.ub[j] = 0.0
        self.std.lb[n_real:] = 0.0
        self.std.ub[n_real:] = 0.0

    def _pivot(self, row, entering, degenerate=False):
        w = self.binv @ self.std.A[:, entering]
        piv = w[row]
        if abs(piv) < self.ptol:
            raise np.linalg.LinAlgError("tiny pivot")
        leaving = self.basic[row]
        self.basic[row] = entering
        self.vstatus[entering] = _BASIC
        self.vstatus[leaving] = _AT_LB if math.isfinite(self.std.lb[leaving]) else (
            _AT_UB if math.isfinite(self.std.ub[leaving]) else _FREE)
        self.binv[row] /= piv
        for i in range(self.m):
            if i != row and w[i] != 0.0:
                self.binv[i] -= w[i] * self.binv[row]
        self._recompute_xb()

    # -- the simplex loop ----------------------------------------------------

    def _iterate(self, cost) -> SolverStatus:
        bland = False
        stall = 0
        last_obj = math.inf
        since_refactor = 0
        dtol = self.tol.opt * (1.0 + float(np.abs(cost).max(initial=0.0)))
        while True:
            if self.iterations >= self.iteration_limit:
                return SolverStatus.ITERATION_LIMIT
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self._refactorize()
                since_refactor = 0

            y = cost[self.basic] @ self.binv
            d = cost - y @ self.std.A
            entering = self._price(d, bland, dtol)
            if entering is None:
                return SolverStatus.OPTIMAL

            direction = self._direction(entering, d[entering])
            w = self.binv @ self.std.A[:, entering]
            t, limit_row, to_upper = self._ratio_test(entering, direction, w, bland)
            if t is None:
                return SolverStatus.UNBOUNDED

            self._apply_step(entering, direction, w, t, limit_row, to_upper)

            obj = float(cost[self.basic] @ self.xb
                        + self._nonbasic_cost(cost))
            if obj < last_obj - 1e-12:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > max(50, 2 * self.m):
                    bland = True
            last_obj = obj

    def _nonbasic_cost(self, cost):
        vals = self._nonbasic_values()
        vals[self.basic] = 0.0
        return float(cost @ vals)

    def _price(self, d, bland, dtol):
        viol = np.zeros(self.ncols)
        fixed = self.std.lb >= self.std.ub  # pinned vars cannot move
        at_lb = (self.vstatus == _AT_LB) & ~fixed
        at_ub = (self.vstatus == _AT_UB) & ~fixed
        free = self.vstatus == _FREE
        viol[at_lb] = np.maximum(0.0, -d[at_lb])
        viol[at_ub] = np.maximum(0.0, d[at_ub])
        viol[free] = np.abs(d[free])
        cands = np.flatnonzero(viol > dtol)
        if cands.size == 0:
            return None
        if bland:
            return int(cands[0])
        return int(cands[np.argmax(viol[cands])])

    def _direction(self, j, dj):
        if self.vstatus[j] == _AT_LB:
            return 1.0
        if self.vstatus[j] == _AT_UB:
            return -1.0
        return 1.0 if dj < 0 else -1.0

    def _ratio_test(self, entering, direction, w, bland):
        """Largest step t >= 0 keeping all basic variables within bounds.

        Returns (t, limiting_row, leaving_to_upper); limiting_row is None
        for a bound flip of the entering variable, and t is None when the
        step is unbounded.
        """
        lo_b = self.std.lb[self.basic]
        hi_b = self.std.ub[self.basic]
        coef = direction * w  # basic values move by -coef * t
        t_best = math.inf
        row_best = None
        to_upper = False
        piv_best = 0.0
        for i in range(self.m):
            ci = coef[i]
            if ci > self.ptol:
                if not math.isfinite(lo_b[i]):
                    continue
                ti = (self.xb[i] - lo_b[i]) / ci
                hits_upper = False
            elif ci < -self.ptol:
                if not math.isfinite(hi_b[i]):
                    continue
                ti = (hi_b[i] - self.xb[i]) / (-ci)
                hits_upper = True
            else:
                continue
            ti = max(ti, 0.0)
            better = ti < t_best - 1e-12
            tie = abs(ti - t_best) <= 1e-12
            prefer = (bland and tie and row_best is not None
                      and self.basic[i] < self.basic[row_best])
            if better or prefer or (tie and not bland and abs(ci) > piv_best):
                t_best, row_best, to_upper, piv_best = ti, i, hits_upper, abs(ci)

        span = self.std.ub[entering] - self.std.lb[entering]
        if math.isfinite(span) and span < t_best:
            return span, None, False
        if not math.isfinite(t_best):
            return None, None, False
        return t_best, row_best, to_upper

    def _apply_step(self, entering, direction, w, t, limit_row, to_upper):
        if limit_row is None:
            # Bound flip: entering moves across to its other bound.
            self.vstatus[entering] = _AT_UB if direction > 0 else _AT_LB
            self.xb -= direction * t * w
            return
        piv = w[limit_row]
        if abs(piv) < self.ptol:
            self._refactorize()
            piv = (self.binv[limit_row] @ self.std.A[:, entering])
            if abs(piv) < self.ptol:
                raise np.linalg.LinAlgError("pivot vanished")
        leaving = self.basic[limit_row]
        self.basic[limit_row] = entering
        self.vstatus[entering] = _BASIC
        self.vstatus[leaving] = _AT_UB if to_upper else _AT_LB
        w2 = w.copy()
        self.binv[limit_row] /= piv
        for i in range(self.m):
            if i != limit_row and w2[i] != 0.0:
                self.binv[i] -= w2[i] * self.binv[limit_row]
        self._recompute_xb()

    # -- extraction ----------------------------------------------------------

    def _extract(self, model, want_duals) -> SimplexOutcome:
        std = self.std
        vals = self._nonbasic_values()
        vals[self.basic] = self.xb
        x = vals[:std.n_struct]
        # Clamp solver noise back into bounds before reporting.
        x = np.minimum(np.maximum(x, std.lb[:std.n_struct]), std.ub[:std.n_struct])
        obj = float(std.c[:std.n_struct] @ x) + model.objective_offset
        primal = {v.name: float(x[j]) for j, v in enumerate(model.variables)}
        duals = None
        if want_duals:
            y = std.c[self.basic] @ self.binv
            duals = {name: 0.0 for name in std.dropped_names}
            for k, name in enumerate(std.row_names):
                duals[name] = float(y[k] / std.row_scale[k])
        # A basis referencing artificial columns cannot seed a fresh solve.
        if self.ncols > self.n_real and bool(np.any(self.basic >= self.n_real)):
            basis = None
        else:
            basis = Basis(self.basic.copy(), self.vstatus[:self.n_real].copy())
        return SimplexOutcome(
            SolveResult(SolverStatus.OPTIMAL, obj, primal, duals,
                        gap=0.0, iterations=self.iterations),
            basis)
