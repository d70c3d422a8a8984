"""Bundled study cases.

``three_bus``  - the two-generator triangle used across the test suite:
one 80 MW load and a 20 MW wind forecast at node 3, a tight 5 MW line
between the generator nodes, deployment costs 1.2x/0.8x the energy cost.

``synthetic24`` - a 24-node, two-zone system for desk-scale experiments:
three cheap and three expensive reserve generators (cost split as in the
larger benchmark), four base units, and eight wind plants. Upward reserve
ability of the cheap units is deliberately short of the in-sample extremes
so fully robust AGC scheduling must also lean on expensive units.
"""

from __future__ import annotations

import numpy as np

from .grid import Generator, GridCase, Line, Node
from .scenarios import ScenarioSet, fixed_set


def three_bus() -> GridCase:
    nodes = (
        Node(1),
        Node(2),
        Node(3, load=80.0, wind_forecast=20.0),
    )
    gens = (
        Generator(node=1, energy_cost=2.0, res_cap_cost_up=1.0,
                  res_cap_cost_down=2.0, deploy_cost_up=2.4,
                  deploy_cost_down=1.6, p_min=0.0, p_max=50.0,
                  res_limit_up=50.0, res_limit_down=50.0),
        Generator(node=2, energy_cost=1.0, res_cap_cost_up=2.0,
                  res_cap_cost_down=1.0, deploy_cost_up=1.2,
                  deploy_cost_down=0.8, p_min=0.0, p_max=50.0,
                  res_limit_up=50.0, res_limit_down=50.0),
    )
    lines = (
        Line(1, 1, 2, susceptance=1.0, capacity=5.0),
        Line(2, 1, 3, susceptance=1.0, capacity=80.0),
        Line(3, 2, 3, susceptance=1.0, capacity=80.0),
    )
    return GridCase(nodes, gens, lines, slack_node=3, name="three-bus")


def three_bus_atoms() -> ScenarioSet:
    """The three equiprobable error realizations at node 3: +20, +10, -20."""
    errors = np.zeros((3, 3))
    errors[2] = [20.0, 10.0, -20.0]
    return fixed_set(errors)


def _reserve_gen(node, cost, r_up, r_down, p_max):
    return Generator(node=node, energy_cost=cost,
                     res_cap_cost_up=0.2 * cost, res_cap_cost_down=0.2 * cost,
                     deploy_cost_up=1.2 * cost, deploy_cost_down=0.8 * cost,
                     p_min=0.0, p_max=p_max,
                     res_limit_up=r_up, res_limit_down=r_down)


def _base_gen(node, cost, p_max):
    return Generator(node=node, energy_cost=cost,
                     res_cap_cost_up=0.2 * cost, res_cap_cost_down=0.2 * cost,
                     deploy_cost_up=1.2 * cost, deploy_cost_down=0.8 * cost,
                     p_min=0.0, p_max=p_max,
                     res_limit_up=0.0, res_limit_down=0.0)


def synthetic24() -> GridCase:
    loads = {
        2: 90.0, 4: 110.0, 6: 120.0, 8: 100.0, 10: 130.0, 12: 90.0,
        13: 160.0, 14: 120.0, 16: 200.0, 17: 170.0, 18: 140.0,
        20: 210.0, 21: 160.0, 22: 150.0, 23: 230.0, 24: 220.0,
    }
    wind = {13: 75.0, 15: 75.0, 16: 75.0, 18: 75.0,
            20: 75.0, 21: 75.0, 23: 75.0, 24: 75.0}
    nodes = tuple(Node(i, load=loads.get(i, 0.0), wind_forecast=wind.get(i, 0.0))
                  for i in range(1, 25))
    gens = (
        # cheap reserve units (zone A)
        _reserve_gen(2, 16.7, r_up=25.0, r_down=60.0, p_max=400.0),
        _reserve_gen(5, 16.1, r_up=20.0, r_down=60.0, p_max=400.0),
        _reserve_gen(9, 12.6, r_up=20.0, r_down=60.0, p_max=400.0),
        # expensive reserve units (zone B)
        _reserve_gen(14, 124.6, r_up=40.0, r_down=40.0, p_max=200.0),
        _reserve_gen(18, 100.0, r_up=45.0, r_down=45.0, p_max=200.0),
        _reserve_gen(22, 110.0, r_up=40.0, r_down=40.0, p_max=200.0),
        # base units, no reserve capability
        _base_gen(3, 20.0, p_max=400.0),
        _base_gen(7, 21.0, p_max=400.0),
        _base_gen(15, 22.0, p_max=400.0),
        _base_gen(19, 23.0, p_max=400.0),
    )
    ring_a = [(i, i + 1) for i in range(1, 12)] + [(12, 1)]
    ring_b = [(i, i + 1) for i in range(13, 24)] + [(24, 13)]
    chords = [(1, 5), (2, 8), (4, 10), (6, 12),
              (13, 17), (14, 20), (16, 22), (18, 24), (15, 21)]
    ties = [(3, 15), (7, 19), (11, 23)]
    lines = []
    lid = 1
    for frm, to in ring_a + ring_b:
        lines.append(Line(lid, frm, to, susceptance=2.0, capacity=600.0))
        lid += 1
    for frm, to in chords:
        lines.append(Line(lid, frm, to, susceptance=1.5, capacity=600.0))
        lid += 1
    for frm, to in ties:
        lines.append(Line(lid, frm, to, susceptance=3.0, capacity=450.0))
        lid += 1
    return GridCase(nodes, gens, tuple(lines), slack_node=1, name="synthetic24")


BUNDLED = {"three-bus": three_bus, "synthetic24": synthetic24}


def load_bundled(name: str) -> GridCase:
    try:
        return BUNDLED[name]()
    except KeyError:
        raise KeyError(f"unknown bundled case {name!r}; "
                       f"available: {sorted(BUNDLED)}")
