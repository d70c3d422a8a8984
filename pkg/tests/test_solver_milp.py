import itertools

import numpy as np
import pytest

from stochdcopf.solver import (LinearModel, SolverStatus, relax_binaries,
                               solve_lp, solve_milp)


def _random_milp(rng, max_binaries=8):
    nb = int(rng.integers(1, max_binaries + 1))
    nc = int(rng.integers(0, 4))
    model = LinearModel()
    for j in range(nb):
        model.add_var(f"y{j}", obj=float(rng.normal() * 5), binary=True)
    for j in range(nc):
        model.add_var(f"x{j}", lb=0.0, ub=float(rng.random() * 10),
                      obj=float(rng.normal() * 5))
    names = [f"y{j}" for j in range(nb)] + [f"x{j}" for j in range(nc)]
    for i in range(int(rng.integers(1, 12))):
        coefs = rng.normal(size=nb + nc)
        coefs[rng.random(nb + nc) < 0.4] = 0.0
        model.add_constr(f"r{i}", [(names[j], coefs[j])
                                   for j in range(nb + nc) if coefs[j] != 0.0],
                         rng.choice(["<=", ">="]), float(rng.normal() * 3))
    model.seal()
    return model, nb


def _enumerate(model, nb):
    best = np.inf
    for bits in itertools.product([0.0, 1.0], repeat=nb):
        fixed = model.with_bounds({f"y{j}": (bits[j], bits[j])
                                   for j in range(nb)})
        res = solve_lp(relax_binaries(fixed), backend="highs")
        if res.is_optimal:
            best = min(best, res.objective)
    return best


def test_trivial_binary_round_up():
    model = LinearModel()
    model.add_var("y", obj=1.0, binary=True)
    model.add_constr("c", [("y", 1.0)], ">=", 0.5)
    model.seal()
    res = solve_milp(model)
    assert res.is_optimal
    assert res.objective == pytest.approx(1.0, abs=1e-9)
    assert res.primal["y"] == pytest.approx(1.0, abs=1e-6)


def test_knapsack_matches_enumeration():
    values = [6.0, 5.0, 4.0]
    weights = [5.0, 4.0, 3.0]
    model = LinearModel()
    for j in range(3):
        model.add_var(f"y{j}", obj=-values[j], binary=True)
    model.add_constr("w", [(f"y{j}", weights[j]) for j in range(3)], "<=", 8.0)
    model.seal()
    best = min(
        -sum(v * b for v, b in zip(values, bits))
        for bits in itertools.product([0, 1], repeat=3)
        if sum(w * b for w, b in zip(weights, bits)) <= 8.0)
    res = solve_milp(model)
    assert res.objective == pytest.approx(best, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_random_milps_match_enumeration(seed):
    rng = np.random.default_rng(seed)
    model, nb = _random_milp(rng)
    best = _enumerate(model, nb)
    mine = solve_milp(model, backend="bundled")
    highs = solve_milp(model, backend="highs")
    if np.isfinite(best):
        assert mine.is_optimal
        assert mine.objective == pytest.approx(best, abs=1e-6 * max(1, abs(best)))
        assert highs.objective == pytest.approx(best, abs=1e-6 * max(1, abs(best)))
    else:
        assert mine.status is SolverStatus.INFEASIBLE
        assert highs.status is SolverStatus.INFEASIBLE


def test_twelve_binaries_against_enumeration():
    rng = np.random.default_rng(99)
    while True:
        model, nb = _random_milp(rng, max_binaries=12)
        if nb >= 10:
            best = _enumerate(model, nb)
            if np.isfinite(best):
                break
    res = solve_milp(model)
    assert res.objective == pytest.approx(best, abs=1e-6 * max(1, abs(best)))


def test_relax_binaries_no_op_without_binaries():
    model = LinearModel()
    model.add_var("x", lb=0.0, ub=2.0, obj=1.0)
    model.seal()
    relaxed = relax_binaries(model)
    assert relaxed.variables == model.variables


def test_relax_binaries_keeps_unit_box():
    model = LinearModel()
    model.add_var("y", binary=True, obj=-1.0)
    model.seal()
    relaxed = relax_binaries(model)
    var = relaxed.variables[0]
    assert not var.is_binary
    assert (var.lb, var.ub) == (0.0, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_relaxation_bounds_milp(seed):
    rng = np.random.default_rng(400 + seed)
    model, nb = _random_milp(rng)
    milp = solve_milp(model)
    lp = solve_lp(relax_binaries(model))
    if milp.is_optimal:
        assert lp.is_optimal
        assert lp.objective <= milp.objective + 1e-6


def test_node_limit_status():
    rng = np.random.default_rng(17)
    while True:
        model, nb = _random_milp(rng, max_binaries=8)
        root = solve_lp(relax_binaries(model))
        if root.is_optimal:
            frac = any(1e-4 < root.primal[f"y{j}"] < 1 - 1e-4 for j in range(nb))
            if frac:
                break
    res = solve_milp(model, node_limit=0)
    assert res.status in (SolverStatus.ITERATION_LIMIT, SolverStatus.INFEASIBLE)


def test_milp_determinism():
    rng = np.random.default_rng(55)
    model, _ = _random_milp(rng)
    a = solve_milp(model)
    b = solve_milp(model)
    assert a.status == b.status
    if a.is_optimal:
        assert a.objective == b.objective
        assert a.primal == b.primal


def test_gap_reported_zero_at_optimum():
    model = LinearModel()
    model.add_var("y", obj=2.0, binary=True)
    model.add_constr("c", [("y", 1.0)], ">=", 1.0)
    model.seal()
    res = solve_milp(model)
    assert res.gap <= 1e-9
