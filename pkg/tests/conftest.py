import numpy as np
import pytest

from stochdcopf.cases import three_bus, three_bus_atoms
from stochdcopf.grid import GridCase, Generator, Line, Node, compute_ptdf, validate_case
from stochdcopf.scenarios import DistributionSpec, sample
from stochdcopf.solver import solve_lp
from stochdcopf.formulations import build_agc_robust


@pytest.fixture(scope="session")
def tb_case():
    return three_bus()


@pytest.fixture(scope="session")
def tb_ptdf(tb_case):
    return compute_ptdf(tb_case)


@pytest.fixture(scope="session")
def tb_atoms():
    return three_bus_atoms()


def random_connected_case(rng, max_nodes=10, tight_lines=True):
    """A random feasible study case: tree plus chords, 2-4 generators,
    wind at 1-3 nodes, reserve abilities around the scenario extremes."""
    n = int(rng.integers(3, max_nodes + 1))
    nodes = []
    total_load = 0.0
    wind_nodes = rng.choice(n, size=int(rng.integers(1, min(3, n) + 1)),
                            replace=False)
    for i in range(n):
        load = float(rng.uniform(10, 60)) if rng.random() < 0.7 else 0.0
        wind = float(rng.uniform(15, 50)) if i in wind_nodes else 0.0
        total_load += load
        nodes.append(Node(i + 1, load=load, wind_forecast=wind))
    total_wind = sum(nd.wind_forecast for nd in nodes)

    lines = []
    lid = 1
    order = rng.permutation(n) + 1
    for k in range(1, n):
        a = int(order[k])
        b = int(order[int(rng.integers(0, k))])
        lines.append(Line(lid, a, b, float(rng.uniform(0.5, 2.0)), 1e4))
        lid += 1
    for _ in range(int(rng.integers(0, n))):
        a, b = rng.choice(n, size=2, replace=False) + 1
        if any({l.from_node, l.to_node} == {a, b} for l in lines):
            continue
        lines.append(Line(lid, int(a), int(b), float(rng.uniform(0.5, 2.0)), 1e4))
        lid += 1

    n_gens = int(rng.integers(2, 5))
    gen_nodes = rng.choice(n, size=n_gens, replace=True) + 1
    sigma_scale = 0.15 * total_wind  # rough per-node error scale
    gens = []
    for gn in gen_nodes:
        cost = float(rng.uniform(5, 40))
        r_up = float(rng.uniform(0.3, 1.2) * max(sigma_scale, 5.0))
        r_dn = float(rng.uniform(0.3, 1.2) * max(sigma_scale, 5.0))
        p_max = float(total_load / n_gens * rng.uniform(1.2, 2.0) + r_up)
        gens.append(Generator(int(gn), cost, 0.2 * cost, 0.2 * cost,
                              1.2 * cost, 0.8 * cost, 0.0, p_max, r_up, r_dn))
    slack = int(rng.integers(1, n + 1))
    case = GridCase(tuple(nodes), tuple(gens), tuple(lines), slack_node=slack)

    if tight_lines and lines:
        # Tighten a couple of lines to just above their nominal loading so
        # flow limits participate without making the case infeasible.
        ptdf = compute_ptdf(case)
        inj = np.zeros(n)
        for g in gens:
            inj[case.node_index(g.node)] += total_load / n_gens
        inj += case.wind_forecasts() - case.loads()
        flows = np.abs(ptdf.values @ inj)
        new_lines = []
        for k, line in enumerate(case.lines):
            cap = max(float(flows[k]) * rng.uniform(1.5, 3.0),
                      0.35 * total_load, 20.0)
            new_lines.append(Line(line.id, line.from_node, line.to_node,
                                  line.susceptance, cap))
        case = GridCase(tuple(nodes), tuple(gens), tuple(new_lines),
                        slack_node=slack)
    return case


def random_instance(seed, max_nodes=10, n_scen=8, max_tries=50):
    """Case plus scenario set for which the robust model is feasible."""
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        case = random_connected_case(rng, max_nodes)
        if any(d.level == "error" for d in validate_case(case)):
            continue
        scen = sample(case, DistributionSpec(), n_scen,
                      seed=int(seed) * 1000 + attempt)
        ptdf = compute_ptdf(case)
        res = solve_lp(build_agc_robust(case, scen, ptdf), backend="highs")
        if res.is_optimal:
            return case, scen, ptdf
    raise RuntimeError(f"no feasible random instance for seed {seed}")
