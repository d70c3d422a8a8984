import numpy as np
import pytest

from stochdcopf.grid import (Generator, GridCase, GridError, Line, Node,
                             case_hash, compute_ptdf, dump_case_text,
                             parse_case_text, validate_case)

from conftest import random_connected_case


def test_validate_three_bus_clean(tb_case):
    assert validate_case(tb_case) == []


def test_validate_zero_capacity_line(tb_case):
    bad = GridCase(tb_case.nodes, tb_case.generators,
                   tb_case.lines[:2] + (Line(3, 2, 3, 1.0, 0.0),),
                   slack_node=3)
    messages = [d.message for d in validate_case(bad)]
    assert any("line capacity must be positive" in m for m in messages)


def test_validate_duplicate_node_id(tb_case):
    bad = GridCase((Node(1), Node(1), Node(3, load=80.0)), tb_case.generators,
                   tb_case.lines, slack_node=3)
    messages = [d.message for d in validate_case(bad)]
    assert any("unique" in m for m in messages)


def test_validate_capacity_shortfall_warns(tb_case):
    nodes = (Node(1), Node(2), Node(3, load=500.0, wind_forecast=20.0))
    short = GridCase(nodes, tb_case.generators, tb_case.lines, slack_node=3)
    diags = validate_case(short)
    assert any(d.level == "warning" and "cannot cover" in d.message
               for d in diags)


def test_validate_deploy_cost_inversion_warns(tb_case):
    gens = (Generator(1, 2.0, 1.0, 2.0, 0.5, 1.6, 0.0, 50.0, 50.0, 50.0),
            tb_case.generators[1])
    diags = validate_case(GridCase(tb_case.nodes, gens, tb_case.lines, 3))
    assert any(d.level == "warning" and "deploy_cost_up" in d.message
               for d in diags)


def test_ptdf_triangle_values(tb_case, tb_ptdf):
    # Independent route: solve the reduced nodal equations directly.
    lap = np.array([[2.0, -1.0], [-1.0, 2.0]])  # nodes 1,2 with slack 3
    theta = np.linalg.solve(lap, np.array([1.0, 0.0]))
    expected_l1 = theta[0] - theta[1]
    assert tb_ptdf.values[0, 0] == pytest.approx(expected_l1, abs=1e-12)
    assert tb_ptdf.values[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert tb_ptdf.values[0, 1] == pytest.approx(-1.0 / 3.0, abs=1e-12)
    assert tb_ptdf.values[0, 2] == 0.0


def test_ptdf_slack_column_zero(tb_ptdf):
    assert np.all(tb_ptdf.values[:, 2] == 0.0)


def test_ptdf_two_node_radial():
    case = GridCase((Node(1), Node(2, load=10.0)),
                    (Generator(1, 1, 1, 1, 1.2, 0.8, 0, 20, 5, 5),),
                    (Line(1, 1, 2, 3.7, 15.0),), slack_node=2)
    ptdf = compute_ptdf(case)
    assert ptdf.values[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert ptdf.values[0, 1] == 0.0


def test_ptdf_disconnected_raises(tb_case):
    case = GridCase(tb_case.nodes + (Node(4),), tb_case.generators,
                    tb_case.lines, slack_node=3)
    with pytest.raises(GridError, match="not connected"):
        compute_ptdf(case)


@pytest.mark.parametrize("seed", range(8))
def test_ptdf_nodal_conservation(seed):
    rng = np.random.default_rng(seed)
    case = random_connected_case(rng, max_nodes=10, tight_lines=False)
    ptdf = compute_ptdf(case)
    n = case.n_nodes
    x = rng.normal(size=n)
    x -= x.mean()  # balanced injection
    flows = ptdf.flows(x)
    for i, node in enumerate(case.nodes):
        net = 0.0
        for k, line in enumerate(case.lines):
            if line.from_node == node.id:
                net += flows[k]
            if line.to_node == node.id:
                net -= flows[k]
        assert net == pytest.approx(x[i], abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_ptdf_slack_invariance(seed):
    rng = np.random.default_rng(100 + seed)
    case = random_connected_case(rng, max_nodes=8, tight_lines=False)
    ids = [n.id for n in case.nodes]
    s1, s2 = ids[0], ids[-1]
    p1 = compute_ptdf(GridCase(case.nodes, case.generators, case.lines, s1))
    p2 = compute_ptdf(GridCase(case.nodes, case.generators, case.lines, s2))
    for _ in range(4):
        x = rng.normal(size=case.n_nodes)
        x -= x.mean()
        assert np.allclose(p1.flows(x), p2.flows(x), atol=1e-8)


def test_ptdf_radial_tree_is_indicator():
    rng = np.random.default_rng(7)
    nodes = tuple(Node(i + 1, load=float(rng.uniform(0, 10))) for i in range(7))
    lines = tuple(Line(i, i + 1, int(rng.integers(1, i + 1)),
                       float(rng.uniform(0.5, 3.0)), 100.0)
                  for i in range(1, 7))
    case = GridCase(nodes, (Generator(1, 1, 1, 1, 1.2, 0.8, 0, 99, 5, 5),),
                    lines, slack_node=1)
    ptdf = compute_ptdf(case)
    vals = ptdf.values
    assert np.all((np.abs(vals) < 1e-9) | (np.abs(np.abs(vals) - 1.0) < 1e-9))


def test_ptdf_entries_bounded(tb_ptdf):
    assert np.abs(tb_ptdf.values).max() <= 1.0 + 1e-9


def test_case_file_round_trip(tb_case):
    text = dump_case_text(tb_case)
    back = parse_case_text(text)
    assert case_hash(back) == case_hash(tb_case)
    assert back.slack_node == tb_case.slack_node
    assert back.generators == tb_case.generators
    assert back.lines == tb_case.lines


def test_case_file_rejects_unknown_field(tb_case):
    text = dump_case_text(tb_case).replace("wind_forecast:", "wind_forecst:")
    with pytest.raises(GridError, match="unknown field"):
        parse_case_text(text)


def test_case_file_rejects_unknown_section(tb_case):
    text = dump_case_text(tb_case) + "\nstorage: []\n"
    with pytest.raises(GridError, match="unknown field"):
        parse_case_text(text)


def test_case_file_missing_generator_field(tb_case):
    text = dump_case_text(tb_case).replace("  res_limit_up: 50.0\n", "")
    with pytest.raises(GridError, match="missing fields"):
        parse_case_text(text)
