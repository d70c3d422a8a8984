"""Out-of-sample assessment of first-stage dispatch decisions.

Every scenario is scored with a real-time recourse LP: reserve deployment
follows the fixed participation factors, manual redispatch is bounded by
the procured capacities, and nodal slack variables (penalized at P) absorb
whatever reserves cannot. Scenarios are classified as

* ``A`` - AGC alone restores feasibility (manual and slack locked to zero),
* ``M`` - manual redispatch needed, but no deviation remains,
* ``D`` - nonzero deviations are unavoidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formulations import DispatchSolution
from .grid import GridCase, PtdfMatrix
from .scenarios import ScenarioSet
from .solver import LinearModel, SolverStatus, Tolerances, solve_lp

DEV_TOL = 1e-6  # MW; deviations below this count as "no deviation"


class EvaluationError(RuntimeError):
    pass


@dataclass
class RecourseOutcome:
    feasible: bool
    cost: float = math.nan
    alpha: np.ndarray | None = None
    delta_plus: np.ndarray | None = None
    delta_minus: np.ndarray | None = None
    r_plus: np.ndarray | None = None
    r_minus: np.ndarray | None = None


@dataclass(frozen=True)
class EvaluationRecord:
    scenario: int
    cls: str                    # "A" | "M" | "D"
    cost: float
    delta_plus: np.ndarray
    delta_minus: np.ndarray

    @property
    def total_deviation(self) -> float:
        return float(self.delta_plus.sum() + self.delta_minus.sum())


@dataclass
class EvaluationReport:
    frac_agc: float
    frac_manual: float
    frac_deviation: float
    expected_cost: float
    top5_deviation: float       # mean of the ceil(5%) largest deviations
    penalty: float
    records: list[EvaluationRecord] = field(default_factory=list)

    @property
    def n_scenarios(self) -> int:
        return len(self.records)


def default_penalty(case: GridCase) -> float:
    """Deviation penalty: twice the most expensive production cost."""
    if not case.generators:
        raise EvaluationError("case has no generators")
    return 2.0 * max(g.energy_cost for g in case.generators)


def first_stage_cost(solution: DispatchSolution, case: GridCase) -> float:
    total = 0.0
    for g, gen in enumerate(case.generators):
        total += (gen.energy_cost * solution.p[g]
                  + gen.res_cap_cost_up * solution.r_cap_up[g]
                  + gen.res_cap_cost_down * solution.r_cap_down[g])
    return total


def build_recourse_model(solution: DispatchSolution, case: GridCase,
                         ptdf: PtdfMatrix, omega: np.ndarray, penalty: float,
                         lock_manual: bool) -> LinearModel:
    """Real-time operation LP for one error realization ``omega`` (per node)."""
    n_g = len(case.generators)
    n_n = case.n_nodes
    omega = np.asarray(omega, dtype=float)
    agg = float(omega.sum())
    model = LinearModel(name="recourse")
    model.objective_offset = first_stage_cost(solution, case)
    span = (0.0, 0.0) if lock_manual else (-math.inf, math.inf)
    for g, gen in enumerate(case.generators):
        model.add_var(f"rp_g{g}", lb=0.0, obj=gen.deploy_cost_up)
        model.add_var(f"rm_g{g}", lb=0.0, obj=-gen.deploy_cost_down)
        model.add_var(f"alpha_g{g}", lb=span[0], ub=span[1])
    for n in range(n_n):
        model.add_var(f"dp_n{n}", lb=0.0, ub=span[1], obj=penalty)
        model.add_var(f"dm_n{n}", lb=0.0, ub=span[1], obj=penalty)

    balance = [(f"alpha_g{g}", 1.0) for g in range(n_g)]
    balance += [(f"dp_n{n}", 1.0) for n in range(n_n)]
    balance += [(f"dm_n{n}", -1.0) for n in range(n_n)]
    model.add_constr("balance", balance, "==", 0.0)

    for g in range(n_g):
        agc = -agg * solution.beta[g]
        model.add_constr(f"ident_g{g}",
                         [(f"rp_g{g}", 1.0), (f"rm_g{g}", -1.0),
                          (f"alpha_g{g}", -1.0)], "==", agc)
        model.add_constr(f"res_up_g{g}", [(f"alpha_g{g}", 1.0)], "<=",
                         solution.r_cap_up[g] - agc)
        model.add_constr(f"res_dn_g{g}", [(f"alpha_g{g}", 1.0)], ">=",
                         -solution.r_cap_down[g] - agc)

    gen_nodes = [case.node_index(g.node) for g in case.generators]
    injections = np.zeros(n_n)
    for g, n_idx in enumerate(gen_nodes):
        injections[n_idx] += solution.p[g] - agg * solution.beta[g]
    injections += case.wind_forecasts() + omega - case.loads()
    base_flows = ptdf.values @ injections
    for k, line in enumerate(case.lines):
        terms = []
        for g, n_idx in enumerate(gen_nodes):
            coef = ptdf.values[k, n_idx]
            if coef != 0.0:
                terms.append((f"alpha_g{g}", coef))
        for n in range(n_n):
            coef = ptdf.values[k, n]
            if coef != 0.0:
                terms.append((f"dp_n{n}", coef))
                terms.append((f"dm_n{n}", -coef))
        model.add_constr(f"flow_hi_l{line.id}", list(terms), "<=",
                         line.capacity - base_flows[k])
        model.add_constr(f"flow_lo_l{line.id}", list(terms), ">=",
                         -line.capacity - base_flows[k])
    return model.seal()


def realtime_recourse(solution: DispatchSolution, case: GridCase,
                      ptdf: PtdfMatrix, omega: np.ndarray, penalty: float,
                      lock_manual: bool, *, backend=None,
                      tol: Tolerances | None = None) -> RecourseOutcome:
    """Solve the real-time LP; an infeasible locked solve signals that AGC
    alone cannot handle the scenario (not an error)."""
    model = build_recourse_model(solution, case, ptdf, omega, penalty, lock_manual)
    res = solve_lp(model, tol, backend=backend)
    if res.status is SolverStatus.INFEASIBLE:
        if lock_manual:
            return RecourseOutcome(feasible=False)
        raise EvaluationError(
            "unlocked recourse LP is infeasible; deviation slacks should "
            "make that impossible")
    if not res.is_optimal:
        raise EvaluationError(f"recourse LP ended with {res.status.value}")
    n_g = len(case.generators)
    n_n = case.n_nodes
    prim = res.primal
    return RecourseOutcome(
        feasible=True,
        cost=float(res.objective),
        alpha=np.array([prim[f"alpha_g{g}"] for g in range(n_g)]),
        delta_plus=np.array([prim[f"dp_n{n}"] for n in range(n_n)]),
        delta_minus=np.array([prim[f"dm_n{n}"] for n in range(n_n)]),
        r_plus=np.array([prim[f"rp_g{g}"] for g in range(n_g)]),
        r_minus=np.array([prim[f"rm_g{g}"] for g in range(n_g)]),
    )


def classify(solution: DispatchSolution, case: GridCase, ptdf: PtdfMatrix,
             omega: np.ndarray, penalty: float, *, scenario: int = 0,
             backend=None, tol: Tolerances | None = None,
             dev_tol: float = DEV_TOL) -> EvaluationRecord:
    """Class A if the locked solve is feasible, else M or D by deviation."""
    locked = realtime_recourse(solution, case, ptdf, omega, penalty, True,
                               backend=backend, tol=tol)
    n_n = case.n_nodes
    if locked.feasible:
        zeros = np.zeros(n_n)
        return EvaluationRecord(scenario, "A", locked.cost, zeros, zeros)
    full = realtime_recourse(solution, case, ptdf, omega, penalty, False,
                             backend=backend, tol=tol)
    worst = max(full.delta_plus.max(initial=0.0), full.delta_minus.max(initial=0.0))
    cls = "M" if worst <= dev_tol else "D"
    return EvaluationRecord(scenario, cls, full.cost,
                            full.delta_plus, full.delta_minus)


def evaluate(solution: DispatchSolution, case: GridCase, ptdf: PtdfMatrix,
             out_set: ScenarioSet, penalty: float, *, backend=None,
             tol: Tolerances | None = None,
             dev_tol: float = DEV_TOL) -> EvaluationReport:
    """Classify every scenario of ``out_set`` and aggregate the statistics.

    AGC-only feasibility and class-A costs reduce to arithmetic on fixed
    quantities, so the locked phase is evaluated for all scenarios at once;
    only scenarios that fail it go through the recourse LP.
    """
    if out_set.n_scenarios < 1:
        raise EvaluationError("out-of-sample set is empty")
    if out_set.n_nodes != case.n_nodes:
        raise EvaluationError("scenario set does not match the case size")
    tol = tol or Tolerances()
    closed_form_ok = all(g.deploy_cost_up >= g.deploy_cost_down
                         for g in case.generators)

    records: list[EvaluationRecord] = []
    if closed_form_ok:
        feasible, costs = _locked_batch(solution, case, ptdf, out_set, tol.feas)
        zeros = np.zeros(case.n_nodes)
        for s in range(out_set.n_scenarios):
            if feasible[s]:
                records.append(EvaluationRecord(s, "A", float(costs[s]),
                                                zeros, zeros))
            else:
                rec = classify(solution, case, ptdf, out_set.errors[:, s],
                               penalty, scenario=s, backend=backend, tol=tol,
                               dev_tol=dev_tol)
                records.append(rec)
    else:
        for s in range(out_set.n_scenarios):
            records.append(classify(solution, case, ptdf, out_set.errors[:, s],
                                    penalty, scenario=s, backend=backend,
                                    tol=tol, dev_tol=dev_tol))
    return summarize(records, penalty)


def summarize(records: list[EvaluationRecord], penalty: float) -> EvaluationReport:
    n = len(records)
    counts = {"A": 0, "M": 0, "D": 0}
    for rec in records:
        counts[rec.cls] += 1
    costs = np.array([rec.cost for rec in records])
    deviations = np.array([rec.total_deviation for rec in records])
    k = math.ceil(0.05 * n)
    top = np.sort(deviations)[::-1][:k]
    return EvaluationReport(
        frac_agc=counts["A"] / n,
        frac_manual=counts["M"] / n,
        frac_deviation=counts["D"] / n,
        expected_cost=float(costs.mean()),
        top5_deviation=float(top.mean()) if k else 0.0,
        penalty=penalty,
        records=records,
    )


def agc_feasible_batch(solution: DispatchSolution, case: GridCase,
                       ptdf: PtdfMatrix, scenario_set: ScenarioSet,
                       feas_tol: float = 1e-7):
    """Vectorized locked solve: AGC-only feasibility and cost per scenario.

    Matches the locked LP exactly: with manual and slack variables pinned
    to zero the LP has fixed deployments per generator, so feasibility is
    arithmetic and the optimal cost has a closed form (valid whenever
    deploy_cost_up >= deploy_cost_down).
    """
    return _locked_batch(solution, case, ptdf, scenario_set, feas_tol)


def _locked_batch(solution, case, ptdf, out_set, feas_tol):
    aggregates = out_set.aggregates()
    beta = solution.beta[:, None]
    deployments = -aggregates[None, :] * beta           # (gens, scenarios)
    res_ok = np.all(
        (deployments <= solution.r_cap_up[:, None] + feas_tol)
        & (deployments >= -solution.r_cap_down[:, None] - feas_tol), axis=0)

    gen_nodes = [case.node_index(g.node) for g in case.generators]
    base = np.zeros(case.n_nodes)
    for g, n_idx in enumerate(gen_nodes):
        base[n_idx] += solution.p[g]
    base += case.wind_forecasts() - case.loads()
    gen_cols = ptdf.values[:, gen_nodes]
    flows = (ptdf.values @ (base[:, None] + out_set.errors)
             + gen_cols @ deployments)
    caps = np.array([l.capacity for l in case.lines])[:, None]
    flow_ok = np.all(np.abs(flows) <= caps + feas_tol, axis=0) if len(
        case.lines) else np.ones(out_set.n_scenarios, dtype=bool)

    c_up = np.array([g.deploy_cost_up for g in case.generators])[:, None]
    c_dn = np.array([g.deploy_cost_down for g in case.generators])[:, None]
    deploy_cost = (c_up * np.maximum(deployments, 0.0)
                   - c_dn * np.maximum(-deployments, 0.0)).sum(axis=0)
    costs = first_stage_cost(solution, case) + deploy_cost
    return res_ok & flow_ok, costs


# -- report serialization -----------------------------------------------------

def dump_report_text(report: EvaluationReport, *, case_hash: str = "",
                     method: str = "", epsilon: float | None = None,
                     seed=None) -> str:
    lines = [
        "# stochdcopf evaluation report",
        f"case_hash {case_hash or '-'}",
        f"method {method or '-'}",
        f"epsilon {repr(epsilon) if epsilon is not None else '-'}",
        f"seed {seed if seed is not None else '-'}",
        f"count {report.n_scenarios}",
        f"frac_agc {repr(report.frac_agc)}",
        f"frac_manual {repr(report.frac_manual)}",
        f"frac_deviation {repr(report.frac_deviation)}",
        f"expected_cost {repr(report.expected_cost)}",
        f"top5_deviation {repr(report.top5_deviation)}",
        f"penalty {repr(report.penalty)}",
        "scenarios",
        "# id class cost deviation",
    ]
    for rec in report.records:
        lines.append(f"{rec.scenario} {rec.cls} {repr(rec.cost)} "
                     f"{repr(rec.total_deviation)}")
    return "\n".join(lines) + "\n"


def parse_report_text(text: str):
    """Returns (header dict, EvaluationReport) from dumped text."""
    header: dict[str, str] = {}
    records: list[EvaluationRecord] = []
    in_rows = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == "scenarios":
            in_rows = True
            continue
        if not in_rows:
            key, _, value = line.partition(" ")
            header[key] = value.strip()
            continue
        sid, cls, cost, dev = line.split()
        dev_val = float(dev)
        # Per-node detail is not serialized; keep the total on one node.
        dp = np.array([dev_val]) if dev_val > 0 else np.zeros(1)
        records.append(EvaluationRecord(int(sid), cls, float(cost),
                                        dp, np.zeros(1)))
    report = EvaluationReport(
        frac_agc=float(header["frac_agc"]),
        frac_manual=float(header["frac_manual"]),
        frac_deviation=float(header["frac_deviation"]),
        expected_cost=float(header["expected_cost"]),
        top5_deviation=float(header["top5_deviation"]),
        penalty=float(header["penalty"]),
        records=records,
    )
    return header, report
