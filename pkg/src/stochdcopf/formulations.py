"""Builders turning a grid case plus scenario set into dispatch models.

Three formulations share one scenario-indexed core:

* ``build_agc_robust`` - affine AGC reserve policy enforced in every
  scenario (a pure LP).
* ``build_agc_jcc``    - the same constraint block deactivatable per
  scenario through a big-M binary, with at most ``q`` deactivations.
* ``build_amgc_saa``   - reserve bounds and line limits hold in every
  scenario, but up to ``q`` scenarios may additionally use manual
  redispatch variables gated by binaries.

Constraint screening and reserve order-statistic cuts are optional,
optimum-preserving model reductions/tightenings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridCase, PtdfMatrix
from .scenarios import ScenarioSet
from .solver import GE, LE, LinearModel, SolveResult, Tolerances, solve_lp


class FormulationError(ValueError):
    pass


@dataclass(frozen=True)
class RiskConfig:
    """Violation/activation budget: at most ``q = floor(epsilon*|S|)``
    scenarios may leave the AGC-only regime."""

    epsilon: float
    n_scenarios: int
    big_m_policy: str = "analytic"        # "analytic" | "fixed"
    big_m_value: float | None = None
    enable_screening: bool = True
    enable_cuts: bool = True
    q: int = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise FormulationError("epsilon must lie in [0, 1)")
        if self.n_scenarios < 1:
            raise FormulationError("scenario count must be positive")
        if self.big_m_policy not in ("analytic", "fixed"):
            raise FormulationError("big_m_policy must be 'analytic' or 'fixed'")
        if self.big_m_policy == "fixed" and self.big_m_value is None:
            raise FormulationError("fixed big-M policy needs big_m_value")
        # The 1e-9 nudge keeps decimal epsilons (0.05 * 200 -> 10) exact.
        q = math.floor(self.epsilon * self.n_scenarios + 1e-9)
        object.__setattr__(self, "q", min(q, self.n_scenarios))


@dataclass
class DispatchSolution:
    """First-stage dispatch plus (optionally) the in-sample recourse."""

    p: np.ndarray                 # per generator, MW
    beta: np.ndarray              # participation factors
    r_cap_up: np.ndarray          # procured upward capacity, MW
    r_cap_down: np.ndarray
    objective: float
    r_plus: np.ndarray | None = None    # (gens, scenarios) deployments
    r_minus: np.ndarray | None = None
    alpha: np.ndarray | None = None     # manual adjustments
    y: np.ndarray | None = None         # activation indicators

    @property
    def n_gens(self) -> int:
        return len(self.p)

    def first_stage_only(self) -> "DispatchSolution":
        return DispatchSolution(self.p.copy(), self.beta.copy(),
                                self.r_cap_up.copy(), self.r_cap_down.copy(),
                                self.objective)


@dataclass(frozen=True)
class ScreeningEntry:
    line_id: int
    direction: str        # "hi" (<= capacity) or "lo" (>= -capacity)
    kept: bool
    worst_flow: float


@dataclass
class ScreeningReport:
    entries: list[ScreeningEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def removed(self) -> set[tuple[int, str]]:
        return {(e.line_id, e.direction) for e in self.entries if not e.kept}

    def to_text(self) -> str:
        lines = ["# line direction kept worst_flow"]
        for e in self.entries:
            lines.append(f"{e.line_id} {e.direction} "
                         f"{int(e.kept)} {repr(e.worst_flow)}")
        for w in self.warnings:
            lines.append(f"# warning {w}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReserveCut:
    """Order-statistic requirement ``value * beta_g <= r_cap_{direction}``."""

    direction: str   # "up" or "down"
    value: float


# -- shared model scaffolding -------------------------------------------------

def _flow_coefficient(ptdf: PtdfMatrix, case: GridCase, line_pos: int) -> np.ndarray:
    """PTDF row mapped onto generator positions."""
    row = ptdf.values[line_pos]
    return np.array([row[case.node_index(g.node)] for g in case.generators])


def _flow_constants(ptdf: PtdfMatrix, case: GridCase, scenarios: ScenarioSet) -> np.ndarray:
    """(lines, scenarios) flow contribution of wind, errors, and load."""
    fixed = case.wind_forecasts() - case.loads()
    return ptdf.values @ (fixed[:, None] + scenarios.errors)


def _base_model(name: str, case: GridCase, scenarios: ScenarioSet,
                with_alpha: bool = False) -> LinearModel:
    model = LinearModel(name=name)
    probs = scenarios.probabilities
    omega = scenarios.aggregates()
    n_s = scenarios.n_scenarios
    for g, gen in enumerate(case.generators):
        model.add_var(f"p_g{g}", lb=gen.p_min, ub=gen.p_max, obj=gen.energy_cost)
        model.add_var(f"beta_g{g}", lb=0.0, ub=1.0)
        model.add_var(f"rd_g{g}", lb=0.0, ub=gen.res_limit_down,
                      obj=gen.res_cap_cost_down)
        model.add_var(f"ru_g{g}", lb=0.0, ub=gen.res_limit_up,
                      obj=gen.res_cap_cost_up)
        for s in range(n_s):
            model.add_var(f"rp_g{g}_s{s}", lb=0.0,
                          obj=probs[s] * gen.deploy_cost_up)
            model.add_var(f"rm_g{g}_s{s}", lb=0.0,
                          obj=-probs[s] * gen.deploy_cost_down)
            if with_alpha:
                model.add_var(f"alpha_g{g}_s{s}",
                              lb=-gen.res_limit_down, ub=gen.res_limit_up)
    model.add_constr("beta_sum", [(f"beta_g{g}", 1.0)
                                  for g in range(len(case.generators))], "==", 1.0)
    net_load = float(case.loads().sum() - case.wind_forecasts().sum())
    model.add_constr("power_balance", [(f"p_g{g}", 1.0)
                                       for g in range(len(case.generators))],
                     "==", net_load)
    for g, gen in enumerate(case.generators):
        model.add_constr(f"gen_lo_g{g}", [(f"p_g{g}", 1.0), (f"rd_g{g}", -1.0)],
                         ">=", gen.p_min)
        model.add_constr(f"gen_hi_g{g}", [(f"p_g{g}", 1.0), (f"ru_g{g}", 1.0)],
                         "<=", gen.p_max)
    # Deployment identity r+ - r- = -Omega*beta (+ alpha under AMGC),
    # enforced in every scenario including deactivated ones.
    for g in range(len(case.generators)):
        for s in range(n_s):
            coeffs = [(f"rp_g{g}_s{s}", 1.0), (f"rm_g{g}_s{s}", -1.0),
                      (f"beta_g{g}", omega[s])]
            if with_alpha:
                coeffs.append((f"alpha_g{g}_s{s}", -1.0))
            model.add_constr(f"ident_g{g}_s{s}", coeffs, "==", 0.0)
    return model


def _append_cut_rows(model: LinearModel, case: GridCase, cuts) -> None:
    for cut in cuts or ():
        if cut.value <= 0.0:
            continue  # implied by beta, r >= 0
        target = "ru" if cut.direction == "up" else "rd"
        for g in range(len(case.generators)):
            model.add_constr(f"cut_{target}_g{g}",
                             [(f"beta_g{g}", cut.value), (f"{target}_g{g}", -1.0)],
                             "<=", 0.0)


def _scenario_rows(case, scenarios, ptdf, *, with_alpha: bool,
                   removed: set[tuple[int, str]]):
    """Yield the per-scenario reserve-bound and line-limit rows.

    Yields (name, coeffs, sense, rhs) tuples; ``with_alpha`` adds the
    manual-adjustment variable into both blocks.
    """
    omega = scenarios.aggregates()
    constants = _flow_constants(ptdf, case, scenarios)
    n_g = len(case.generators)
    for s in range(scenarios.n_scenarios):
        for g in range(n_g):
            down = [(f"beta_g{g}", omega[s]), (f"rd_g{g}", -1.0)]
            up = [(f"beta_g{g}", -omega[s]), (f"ru_g{g}", -1.0)]
            if with_alpha:
                down.append((f"alpha_g{g}_s{s}", -1.0))
                up.append((f"alpha_g{g}_s{s}", 1.0))
            yield f"res_dn_g{g}_s{s}", down, LE, 0.0
            yield f"res_up_g{g}_s{s}", up, LE, 0.0
        for k, line in enumerate(case.lines):
            coef = _flow_coefficient(ptdf, case, k)
            terms = []
            for g in range(n_g):
                if coef[g] != 0.0:
                    terms.append((f"p_g{g}", coef[g]))
                    terms.append((f"beta_g{g}", -omega[s] * coef[g]))
                    if with_alpha:
                        terms.append((f"alpha_g{g}_s{s}", coef[g]))
            if not terms:
                continue
            if (line.id, "hi") not in removed:
                yield (f"flow_hi_l{line.id}_s{s}", list(terms), LE,
                       line.capacity - constants[k, s])
            if (line.id, "lo") not in removed:
                yield (f"flow_lo_l{line.id}_s{s}", list(terms), GE,
                       -line.capacity - constants[k, s])


def _interval_max(coeffs, model: LinearModel) -> float:
    total = 0.0
    for name, coef in coeffs:
        var = model.variables[model.var_index(name)]
        hi = max(coef * var.lb, coef * var.ub)
        if math.isnan(hi) or math.isinf(hi):
            return math.inf
        total += hi
    return total


# -- the three formulations ---------------------------------------------------

def build_agc_robust(case: GridCase, scenarios: ScenarioSet, ptdf: PtdfMatrix,
                     *, screening: ScreeningReport | None = None,
                     cuts=None) -> LinearModel:
    """Every scenario handled by the affine AGC policy alone (LP)."""
    model = _base_model("agc-robust", case, scenarios)
    removed = screening.removed() if screening else set()
    for name, coeffs, sense, rhs in _scenario_rows(
            case, scenarios, ptdf, with_alpha=False, removed=removed):
        model.add_constr(name, coeffs, sense, rhs)
    _append_cut_rows(model, case, cuts)
    return model.seal()


def build_agc_jcc(case: GridCase, scenarios: ScenarioSet, ptdf: PtdfMatrix,
                  risk: RiskConfig, *, screening: ScreeningReport | None = None,
                  cuts=None) -> LinearModel:
    """Joint chance-constrained AGC: one binary per scenario deactivates the
    whole reserve-bound/line-limit block via big-M terms."""
    _check_risk(risk, scenarios)
    model = _base_model("agc-jcc", case, scenarios)
    for s in range(scenarios.n_scenarios):
        fixed = (0.0, 0.0) if risk.q == 0 else (0.0, 1.0)
        model.add_var(f"y_s{s}", lb=fixed[0], ub=fixed[1], binary=True)
    removed = screening.removed() if screening else set()
    for name, coeffs, sense, rhs in _scenario_rows(
            case, scenarios, ptdf, with_alpha=False, removed=removed):
        s = int(name.rsplit("_s", 1)[1])
        big_m = _row_big_m(model, coeffs, sense, rhs, risk)
        if big_m > 0.0:
            sign = -1.0 if sense == LE else 1.0
            coeffs = list(coeffs) + [(f"y_s{s}", sign * big_m)]
        model.add_constr(name, coeffs, sense, rhs)
    model.add_constr("y_budget", [(f"y_s{s}", 1.0)
                                  for s in range(scenarios.n_scenarios)],
                     "<=", float(risk.q))
    _append_cut_rows(model, case, cuts)
    return model.seal()


def build_amgc_saa(case: GridCase, scenarios: ScenarioSet, ptdf: PtdfMatrix,
                   risk: RiskConfig, *, screening: ScreeningReport | None = None,
                   cuts=None) -> LinearModel:
    """Automatic plus manual reserves: limits hold in every scenario, manual
    adjustments are gated to at most ``q`` activated scenarios."""
    _check_risk(risk, scenarios)
    model = _base_model("amgc", case, scenarios, with_alpha=True)
    n_g = len(case.generators)
    n_s = scenarios.n_scenarios
    for s in range(n_s):
        fixed = (0.0, 0.0) if risk.q == 0 else (0.0, 1.0)
        model.add_var(f"y_s{s}", lb=fixed[0], ub=fixed[1], binary=True)
    for s in range(n_s):
        model.add_constr(f"alpha_bal_s{s}",
                         [(f"alpha_g{g}_s{s}", 1.0) for g in range(n_g)],
                         "==", 0.0)
    removed = screening.removed() if screening else set()
    for name, coeffs, sense, rhs in _scenario_rows(
            case, scenarios, ptdf, with_alpha=True, removed=removed):
        model.add_constr(name, coeffs, sense, rhs)
    for g, gen in enumerate(case.generators):
        if gen.res_limit_up == 0.0 and gen.res_limit_down == 0.0:
            continue  # alpha already pinned to zero by its bounds
        for s in range(n_s):
            model.add_constr(f"gate_hi_g{g}_s{s}",
                             [(f"alpha_g{g}_s{s}", 1.0),
                              (f"y_s{s}", -gen.res_limit_up)], "<=", 0.0)
            model.add_constr(f"gate_lo_g{g}_s{s}",
                             [(f"alpha_g{g}_s{s}", 1.0),
                              (f"y_s{s}", gen.res_limit_down)], ">=", 0.0)
    model.add_constr("y_budget", [(f"y_s{s}", 1.0) for s in range(n_s)],
                     "<=", float(risk.q))
    _append_cut_rows(model, case, cuts)
    return model.seal()


def _check_risk(risk: RiskConfig, scenarios: ScenarioSet):
    if risk.n_scenarios != scenarios.n_scenarios:
        raise FormulationError(
            f"risk config was sized for {risk.n_scenarios} scenarios, "
            f"got {scenarios.n_scenarios}")


def _row_big_m(model, coeffs, sense, rhs, risk: RiskConfig) -> float:
    if risk.big_m_policy == "fixed":
        return float(risk.big_m_value)
    if sense == LE:
        bound = _interval_max(coeffs, model) - rhs
    else:
        bound = rhs + _interval_max([(n, -c) for n, c in coeffs], model)
    if bound > 1e9:
        raise FormulationError(
            "analytic big-M exceeds 1e9; pass a fixed big-M value "
            "(RiskConfig(big_m_policy='fixed', big_m_value=...))")
    return max(bound, 0.0)


# -- screening ----------------------------------------------------------------

def screen_line_limits(case: GridCase, scenarios: ScenarioSet, ptdf: PtdfMatrix,
                       *, backend=None, tol: Tolerances | None = None) -> ScreeningReport:
    """Worst-case flow per line and direction over the first-stage polytope.

    A direction is removed only when its worst flow over all scenarios is
    strictly inside the limit (margin ``1e-6 * capacity``); removal is
    optimum-preserving for all three formulations.
    """
    report = ScreeningReport()
    omega = scenarios.aggregates()
    constants = _flow_constants(ptdf, case, scenarios)
    n_g = len(case.generators)
    for k, line in enumerate(case.lines):
        coef = _flow_coefficient(ptdf, case, k)
        for direction in ("hi", "lo"):
            sign = 1.0 if direction == "hi" else -1.0
            worst = -math.inf
            failed = False
            for s in range(scenarios.n_scenarios):
                model = _screening_model(case, coef, omega[s], sign)
                res = solve_lp(model, tol, backend=backend)
                if res.status.name == "UNBOUNDED":
                    worst = math.inf
                    break
                if not res.is_optimal:
                    report.warnings.append(
                        f"line {line.id} {direction} scenario {s}: "
                        f"screening subproblem {res.status.value}; keeping row")
                    failed = True
                    break
                # LP minimizes -sign*(variable part), so the extreme of
                # sign*flow in scenario s is -objective + sign*constant.
                worst = max(worst, -res.objective + sign * constants[k, s])
            margin = 1e-6 * line.capacity
            kept = failed or not (worst < line.capacity - margin)
            worst_flow = math.nan if failed else sign * worst
            report.entries.append(ScreeningEntry(line.id, direction, kept,
                                                 worst_flow))
    return report


def _screening_model(case: GridCase, coef: np.ndarray, omega_s: float,
                     sign: float) -> LinearModel:
    # Maximize sign*(flow) == minimize -sign*(variable part); the constant
    # part is added back by the caller.
    model = LinearModel(name="screen")
    for g, gen in enumerate(case.generators):
        model.add_var(f"p_g{g}", lb=gen.p_min, ub=gen.p_max,
                      obj=-sign * coef[g])
        model.add_var(f"beta_g{g}", lb=0.0, ub=1.0,
                      obj=-sign * (-omega_s * coef[g]))
        model.add_var(f"rd_g{g}", lb=0.0, ub=gen.res_limit_down)
        model.add_var(f"ru_g{g}", lb=0.0, ub=gen.res_limit_up)
        model.add_var(f"alpha_g{g}", lb=-gen.res_limit_down,
                      ub=gen.res_limit_up, obj=-sign * coef[g])
    model.add_constr("beta_sum", [(f"beta_g{g}", 1.0)
                                  for g in range(len(case.generators))], "==", 1.0)
    net_load = float(case.loads().sum() - case.wind_forecasts().sum())
    model.add_constr("power_balance", [(f"p_g{g}", 1.0)
                                       for g in range(len(case.generators))],
                     "==", net_load)
    for g, gen in enumerate(case.generators):
        model.add_constr(f"gen_lo_g{g}", [(f"p_g{g}", 1.0), (f"rd_g{g}", -1.0)],
                         ">=", gen.p_min)
        model.add_constr(f"gen_hi_g{g}", [(f"p_g{g}", 1.0), (f"ru_g{g}", 1.0)],
                         "<=", gen.p_max)
    return model.seal()


# -- reserve order-statistic cuts ---------------------------------------------

def reserve_quantile_cuts(scenarios: ScenarioSet, risk: RiskConfig) -> list[ReserveCut]:
    """Valid inequalities from the (q+1)-th largest aggregate errors.

    At most ``q`` scenarios may leave the AGC regime, so some scenario with
    aggregate error at least the (q+1)-th order statistic must be covered
    by procured capacity alone; with beta >= 0 this yields
    ``v_up * beta_g <= ru_g`` and ``v_dn * beta_g <= rd_g``.
    """
    if risk.q >= scenarios.n_scenarios:
        raise FormulationError("cuts need q < |S|")
    omega = scenarios.aggregates()
    v_up = float(np.sort(-omega)[::-1][risk.q])
    v_dn = float(np.sort(omega)[::-1][risk.q])
    return [ReserveCut("up", v_up), ReserveCut("down", v_dn)]


# -- extraction and checking --------------------------------------------------

def extract_solution(model: LinearModel, result: SolveResult, case: GridCase,
                     scenarios: ScenarioSet, risk: RiskConfig | None = None,
                     tol: float = 1e-6) -> DispatchSolution:
    """Pull a DispatchSolution out of a solve and assert its invariants."""
    if not result.has_incumbent:
        raise FormulationError(f"no solution to extract (status {result.status.value})")
    prim = result.primal
    n_g = len(case.generators)
    n_s = scenarios.n_scenarios
    get = lambda name: prim[name]
    p = np.array([get(f"p_g{g}") for g in range(n_g)])
    beta = np.array([get(f"beta_g{g}") for g in range(n_g)])
    rd = np.array([get(f"rd_g{g}") for g in range(n_g)])
    ru = np.array([get(f"ru_g{g}") for g in range(n_g)])
    rp = np.array([[get(f"rp_g{g}_s{s}") for s in range(n_s)] for g in range(n_g)])
    rm = np.array([[get(f"rm_g{g}_s{s}") for s in range(n_s)] for g in range(n_g)])
    has_alpha = f"alpha_g0_s0" in prim
    has_y = f"y_s0" in prim
    alpha = (np.array([[get(f"alpha_g{g}_s{s}") for s in range(n_s)]
                       for g in range(n_g)]) if has_alpha
             else np.zeros((n_g, n_s)))
    y = np.zeros(n_s, dtype=int)
    if has_y:
        int_tol = Tolerances().integrality
        for s in range(n_s):
            val = get(f"y_s{s}")
            if min(abs(val), abs(val - 1.0)) > int_tol:
                raise FormulationError(f"y_s{s} = {val} is not integral")
            y[s] = int(round(val))

    sol = DispatchSolution(p, beta, ru, rd, float(result.objective),
                           rp, rm, alpha, y)
    _assert_first_stage(sol, case, risk, tol)
    return sol


def _assert_first_stage(sol: DispatchSolution, case: GridCase,
                        risk: RiskConfig | None, tol: float):
    def fail(name, amount):
        raise FormulationError(f"solution violates {name} by {amount:.3e}")

    if abs(sol.beta.sum() - 1.0) > tol:
        fail("beta_sum", abs(sol.beta.sum() - 1.0))
    if sol.beta.min(initial=0.0) < -tol:
        fail("beta_nonneg", -sol.beta.min())
    for g, gen in enumerate(case.generators):
        if sol.p[g] - (gen.p_max - sol.r_cap_up[g]) > tol:
            fail(f"gen_hi_g{g}", sol.p[g] - gen.p_max + sol.r_cap_up[g])
        if (gen.p_min + sol.r_cap_down[g]) - sol.p[g] > tol:
            fail(f"gen_lo_g{g}", gen.p_min + sol.r_cap_down[g] - sol.p[g])
        for arr, hi, name in ((sol.r_cap_up[g], gen.res_limit_up, f"ru_g{g}"),
                              (sol.r_cap_down[g], gen.res_limit_down, f"rd_g{g}")):
            if arr < -tol or arr - hi > tol:
                fail(f"{name}_bounds", max(-arr, arr - hi))
    if sol.alpha is not None and sol.y is not None:
        masked = np.abs(sol.alpha[:, sol.y == 0])
        if masked.size and masked.max() > tol:
            fail("alpha_gating", float(masked.max()))
        col_sums = np.abs(sol.alpha.sum(axis=0))
        if col_sums.size and col_sums.max() > tol:
            fail("alpha_balance", float(col_sums.max()))
    if risk is not None and sol.y is not None and sol.y.sum() > risk.q:
        fail("y_budget", float(sol.y.sum() - risk.q))


def check_solution(case: GridCase, scenarios: ScenarioSet, ptdf: PtdfMatrix,
                   risk: RiskConfig | None, sol: DispatchSolution,
                   kind: str, tol: float = 1e-6) -> list[tuple[str, float]]:
    """Arithmetically verify a full solution against its formulation.

    ``kind`` is one of "agc-robust", "agc-jcc", "amgc". Returns the list
    of (constraint name, violation magnitude) entries above ``tol``.
    """
    if kind not in ("agc-robust", "agc-jcc", "amgc"):
        raise FormulationError(f"unknown formulation kind {kind!r}")
    out: list[tuple[str, float]] = []
    note = lambda name, amount: out.append((name, float(amount)))
    n_g = len(case.generators)
    n_s = scenarios.n_scenarios
    omega = scenarios.aggregates()
    y = sol.y if sol.y is not None else np.zeros(n_s, dtype=int)
    alpha = sol.alpha if sol.alpha is not None else np.zeros((n_g, n_s))
    if kind != "amgc" and sol.alpha is not None and np.abs(sol.alpha).max(initial=0.0) > tol:
        note("alpha_forbidden", np.abs(sol.alpha).max())

    if abs(sol.beta.sum() - 1.0) > tol:
        note("beta_sum", abs(sol.beta.sum() - 1.0))
    if sol.beta.min(initial=0.0) < -tol:
        note("beta_nonneg", -sol.beta.min())
    net_load = case.loads().sum() - case.wind_forecasts().sum()
    if abs(sol.p.sum() - net_load) > tol:
        note("power_balance", abs(sol.p.sum() - net_load))
    for g, gen in enumerate(case.generators):
        v = sol.p[g] + sol.r_cap_up[g] - gen.p_max
        if v > tol:
            note(f"gen_hi_g{g}", v)
        v = gen.p_min + sol.r_cap_down[g] - sol.p[g]
        if v > tol:
            note(f"gen_lo_g{g}", v)
        if sol.r_cap_up[g] > gen.res_limit_up + tol:
            note(f"ru_limit_g{g}", sol.r_cap_up[g] - gen.res_limit_up)
        if sol.r_cap_down[g] > gen.res_limit_down + tol:
            note(f"rd_limit_g{g}", sol.r_cap_down[g] - gen.res_limit_down)
        if sol.r_cap_up[g] < -tol:
            note(f"ru_nonneg_g{g}", -sol.r_cap_up[g])
        if sol.r_cap_down[g] < -tol:
            note(f"rd_nonneg_g{g}", -sol.r_cap_down[g])

    if sol.r_plus is not None:
        if sol.r_plus.min(initial=0.0) < -tol or sol.r_minus.min(initial=0.0) < -tol:
            note("deployment_nonneg",
                 max(-sol.r_plus.min(initial=0.0), -sol.r_minus.min(initial=0.0)))
        for s in range(n_s):
            resid = np.abs(sol.r_plus[:, s] - sol.r_minus[:, s]
                           + omega[s] * sol.beta - alpha[:, s])
            if resid.max(initial=0.0) > tol:
                note(f"ident_s{s}", resid.max())

    enforce_always = kind == "amgc" or kind == "agc-robust"
    gens_nodes = [case.node_index(g.node) for g in case.generators]
    flows_fixed = _flow_constants(ptdf, case, scenarios)
    gen_cols = ptdf.values[:, gens_nodes]
    for s in range(n_s):
        relaxed = kind == "agc-jcc" and y[s] == 1
        if relaxed:
            continue
        a_s = alpha[:, s] if kind == "amgc" else np.zeros(n_g)
        agc = -omega[s] * sol.beta + a_s
        v = np.max(agc - sol.r_cap_up)
        if v > tol:
            note(f"res_up_s{s}", v)
        v = np.max(-sol.r_cap_down - agc)
        if v > tol:
            note(f"res_dn_s{s}", v)
        flows = gen_cols @ (sol.p + agc) + flows_fixed[:, s]
        for k, line in enumerate(case.lines):
            if flows[k] - line.capacity > tol:
                note(f"flow_hi_l{line.id}_s{s}", flows[k] - line.capacity)
            if -line.capacity - flows[k] > tol:
                note(f"flow_lo_l{line.id}_s{s}", -line.capacity - flows[k])

    if kind == "amgc":
        for s in range(n_s):
            if abs(alpha[:, s].sum()) > tol:
                note(f"alpha_bal_s{s}", abs(alpha[:, s].sum()))
            for g, gen in enumerate(case.generators):
                hi = y[s] * gen.res_limit_up
                lo = -y[s] * gen.res_limit_down
                if alpha[g, s] - hi > tol:
                    note(f"gate_hi_g{g}_s{s}", alpha[g, s] - hi)
                if lo - alpha[g, s] > tol:
                    note(f"gate_lo_g{g}_s{s}", lo - alpha[g, s])
    if kind in ("agc-jcc", "amgc") and risk is not None:
        if int(y.sum()) > risk.q:
            note("y_budget", y.sum() - risk.q)
    return out
