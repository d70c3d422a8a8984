import numpy as np
import pytest
from scipy.optimize import linprog

from stochdcopf.solver import (LinearModel, ModelError, SolverStatus,
                               Tolerances, get_backend, solve_lp, write_mps)
from stochdcopf.solver.simplex import solve_lp_simplex


def _random_lp(rng, n_max=20, m_max=25, scale_mix=True):
    n = int(rng.integers(1, n_max))
    m = int(rng.integers(0, m_max))
    model = LinearModel()
    c = rng.normal(size=n) * (rng.choice([0.1, 1, 50]) if scale_mix else 1.0)
    lb = np.where(rng.random(n) < 0.3, -rng.random(n) * 10, 0.0)
    ub = lb + rng.random(n) * 20
    for j in range(n):
        u = rng.random()
        if u < 0.1:
            lb[j] = -np.inf
        if u > 0.9:
            ub[j] = np.inf
        model.add_var(f"x{j}", lb=lb[j], ub=ub[j], obj=c[j])
    rows = []
    for i in range(m):
        row = rng.normal(size=n)
        row[rng.random(n) < 0.5] = 0.0
        sense = rng.choice(["<=", ">=", "=="])
        rhs = rng.normal() * 5
        model.add_constr(f"r{i}", [(f"x{j}", row[j]) for j in range(n)
                                   if row[j] != 0.0], sense, rhs)
        rows.append((row, sense, rhs))
    model.seal()
    return model, c, lb, ub, rows


def _scipy_reference(c, lb, ub, rows):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, sense, rhs in rows:
        if sense == "<=":
            A_ub.append(row); b_ub.append(rhs)
        elif sense == ">=":
            A_ub.append(-row); b_ub.append(-rhs)
        else:
            A_eq.append(row); b_eq.append(rhs)
    kw = {}
    if A_ub:
        kw["A_ub"], kw["b_ub"] = np.array(A_ub), np.array(b_ub)
    if A_eq:
        kw["A_eq"], kw["b_eq"] = np.array(A_eq), np.array(b_eq)
    return linprog(c, bounds=np.column_stack([lb, ub]), method="highs", **kw)


def test_min_with_lower_bound_row():
    model = LinearModel()
    model.add_var("x", lb=-np.inf, ub=10.0, obj=1.0)
    model.add_constr("c1", [("x", 1.0)], ">=", 3.0)
    model.seal()
    res = solve_lp(model)
    assert res.is_optimal
    assert res.objective == pytest.approx(3.0, abs=1e-9)


def test_max_via_negated_objective():
    model = LinearModel()
    model.add_var("x", lb=0.0, ub=5.0, obj=-1.0)
    model.seal()
    res = solve_lp(model)
    assert res.objective == pytest.approx(-5.0, abs=1e-9)


def test_unknown_variable_rejected_at_seal():
    model = LinearModel()
    model.add_var("x")
    model.add_constr("c", [("ghost", 1.0)], "<=", 1.0)
    with pytest.raises(ModelError, match="unknown variable"):
        model.seal()


def test_inconsistent_bounds_rejected():
    model = LinearModel()
    with pytest.raises(ModelError, match="lb"):
        model.add_var("x", lb=2.0, ub=1.0)


def test_sealed_model_immutable():
    model = LinearModel()
    model.add_var("x")
    model.seal()
    with pytest.raises(ModelError, match="sealed"):
        model.add_var("y")


def test_constant_row_feasibility():
    model = LinearModel()
    model.add_var("x", lb=0.0, ub=1.0, obj=1.0)
    model.add_constr("ok", [], "<=", 5.0)
    model.seal()
    assert solve_lp(model).is_optimal
    bad = LinearModel()
    bad.add_var("x", lb=0.0, ub=1.0, obj=1.0)
    bad.add_constr("no", [], "<=", -5.0)
    bad.seal()
    assert solve_lp(bad).status is SolverStatus.INFEASIBLE


@pytest.mark.parametrize("seed", range(25))
def test_random_lps_match_scipy(seed):
    rng = np.random.default_rng(seed)
    for _ in range(8):
        model, c, lb, ub, rows = _random_lp(rng)
        mine = solve_lp(model)
        ref = _scipy_reference(c, lb, ub, rows)
        if ref.status == 0:
            assert mine.is_optimal, f"expected optimal, got {mine.status}"
            assert mine.objective == pytest.approx(
                ref.fun, abs=1e-6 * max(1.0, abs(ref.fun)))
        elif ref.status == 2:
            assert mine.status is SolverStatus.INFEASIBLE
        elif ref.status == 3:
            assert mine.status is SolverStatus.UNBOUNDED


@pytest.mark.parametrize("seed", range(10))
def test_duality_identity(seed):
    rng = np.random.default_rng(5000 + seed)
    solved = 0
    while solved < 3:
        model, c, lb, ub, rows = _random_lp(rng, n_max=50, m_max=40,
                                            scale_mix=False)
        res = solve_lp(model)
        if not res.is_optimal or not rows:
            continue
        solved += 1
        y = np.array([res.duals[f"r{i}"] for i in range(len(rows))])
        # Dual-feasibility sign conventions per row sense.
        for i, (_, sense, _) in enumerate(rows):
            if sense == "<=":
                assert y[i] <= 1e-6
            elif sense == ">=":
                assert y[i] >= -1e-6
        A = np.array([row for row, _, _ in rows])
        b = np.array([rhs for _, _, rhs in rows])
        d = c - y @ A
        g = float(y @ b)
        for j in range(len(c)):
            if d[j] >= 0.0:
                assert np.isfinite(lb[j]) or d[j] < 1e-6
                g += d[j] * (lb[j] if np.isfinite(lb[j]) else 0.0)
            else:
                assert np.isfinite(ub[j]) or d[j] > -1e-6
                g += d[j] * (ub[j] if np.isfinite(ub[j]) else 0.0)
        assert g == pytest.approx(res.objective,
                                  abs=1e-6 * max(1.0, abs(res.objective)))


def test_determinism():
    rng = np.random.default_rng(77)
    model, *_ = _random_lp(rng)
    a = solve_lp(model)
    b = solve_lp(model)
    assert a.status == b.status
    assert a.objective == b.objective
    assert a.primal == b.primal


def test_highs_backend_matches_bundled():
    rng = np.random.default_rng(123)
    for _ in range(10):
        model, *_ = _random_lp(rng)
        mine = solve_lp(model, backend="bundled")
        ref = solve_lp(model, backend="highs")
        assert mine.status == ref.status
        if mine.is_optimal:
            assert mine.objective == pytest.approx(
                ref.objective, abs=1e-6 * max(1.0, abs(ref.objective)))


def test_objective_offset_included():
    model = LinearModel(objective_offset=100.0)
    model.add_var("x", lb=2.0, ub=5.0, obj=1.0)
    model.seal()
    assert solve_lp(model).objective == pytest.approx(102.0)
    assert solve_lp(model, backend="highs").objective == pytest.approx(102.0)


def test_warm_start_reuses_feasible_basis():
    model = LinearModel()
    model.add_var("x", lb=0.0, ub=10.0, obj=1.0)
    model.add_var("y", lb=0.0, ub=10.0, obj=2.0)
    model.add_constr("demand", [("x", 1.0), ("y", 1.0)], ">=", 4.0)
    model.seal()
    first = solve_lp_simplex(model)
    warm = solve_lp_simplex(model, warm_start=first.basis)
    assert warm.result.objective == pytest.approx(first.result.objective)
    assert warm.result.iterations <= first.result.iterations


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown backend"):
        get_backend("cplex")


def test_mps_dump(tmp_path):
    model = LinearModel(name="tiny", objective_offset=3.0)
    model.add_var("x", lb=0.0, ub=4.0, obj=1.5)
    model.add_var("y", binary=True, obj=-1.0)
    model.add_var("z", lb=-np.inf, obj=0.25)
    model.add_constr("cap", [("x", 2.0), ("y", 1.0)], "<=", 5.0)
    model.add_constr("pin", [("z", 1.0)], "==", -1.0)
    model.seal()
    path = tmp_path / "tiny.mps"
    write_mps(model, path)
    text = path.read_text()
    for token in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA",
                  "'INTORG'", "'INTEND'", " L  cap", " E  pin", "BV", "MI"):
        assert token in text
