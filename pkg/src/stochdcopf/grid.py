"""Static power-system data and the DC sensitivity (PTDF) matrix.

All powers are in MW; susceptances are per-unit on an implicit 1.0 base,
making PTDF entries dimensionless. GridCase and PtdfMatrix are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml


class GridError(ValueError):
    """Raised for structurally unusable grid data."""


@dataclass(frozen=True)
class Node:
    id: int
    load: float = 0.0            # forecasted demand, MW
    wind_forecast: float = 0.0   # forecasted wind output, MW


@dataclass(frozen=True)
class Generator:
    node: int
    energy_cost: float           # EUR/MWh
    res_cap_cost_up: float       # EUR/MW of procured upward capacity
    res_cap_cost_down: float     # EUR/MW of procured downward capacity
    deploy_cost_up: float        # EUR/MWh deployed upward
    deploy_cost_down: float      # EUR/MWh deployed downward (credited)
    p_min: float
    p_max: float
    res_limit_up: float          # reserve-provision ability, MW
    res_limit_down: float


@dataclass(frozen=True)
class Line:
    id: int
    from_node: int
    to_node: int
    susceptance: float           # per-unit, > 0
    capacity: float              # MW, > 0


@dataclass(frozen=True)
class GridCase:
    nodes: tuple[Node, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    slack_node: int
    mva_base: float = 1.0
    name: str = "case"
    _node_index: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "lines", tuple(self.lines))
        index = {n.id: i for i, n in enumerate(self.nodes)}
        object.__setattr__(self, "_node_index", index)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def node_index(self, node_id: int) -> int:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise GridError(f"unknown node id {node_id}")

    def loads(self) -> np.ndarray:
        return np.array([n.load for n in self.nodes])

    def wind_forecasts(self) -> np.ndarray:
        return np.array([n.wind_forecast for n in self.nodes])

    def gens_at_node(self) -> list[list[int]]:
        """Generator positions grouped by node index."""
        out: list[list[int]] = [[] for _ in self.nodes]
        for g, gen in enumerate(self.generators):
            out[self.node_index(gen.node)].append(g)
        return out


@dataclass(frozen=True)
class PtdfMatrix:
    """Dense matrix; entry [l, n] is the MW flow on line l per MW injected
    at node n and withdrawn at the slack."""

    values: np.ndarray
    slack_index: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def flows(self, injections: np.ndarray) -> np.ndarray:
        """Line flows for a (nodes,) or (nodes, k) injection array."""
        return self.values @ injections


@dataclass(frozen=True)
class Diagnostic:
    level: str   # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


def validate_case(case: GridCase) -> list[Diagnostic]:
    """Check every structural invariant; empty list means the case is clean."""
    diags: list[Diagnostic] = []
    err = lambda msg: diags.append(Diagnostic("error", msg))
    warn = lambda msg: diags.append(Diagnostic("warning", msg))

    ids = [n.id for n in case.nodes]
    if not case.nodes:
        err("case has no nodes")
        return diags
    if len(set(ids)) != len(ids):
        err("node ids must be unique")
    elif sorted(ids) != list(range(min(ids), min(ids) + len(ids))):
        err("node ids must be contiguous")
    for n in case.nodes:
        if not np.isfinite(n.load) or n.load < 0:
            err(f"node {n.id}: load must be finite and non-negative")
        if not np.isfinite(n.wind_forecast) or n.wind_forecast < 0:
            err(f"node {n.id}: wind_forecast must be finite and non-negative")

    id_set = set(ids)
    for g, gen in enumerate(case.generators):
        tag = f"generator {g} (node {gen.node})"
        if gen.node not in id_set:
            err(f"{tag}: unknown node")
        if gen.p_min > gen.p_max:
            err(f"{tag}: p_min exceeds p_max")
        costs = (gen.energy_cost, gen.res_cap_cost_up, gen.res_cap_cost_down,
                 gen.deploy_cost_up, gen.deploy_cost_down)
        if not all(np.isfinite(c) for c in costs):
            err(f"{tag}: all costs must be finite")
        if gen.res_limit_up < 0 or gen.res_limit_down < 0:
            err(f"{tag}: reserve limits must be non-negative")
        if gen.deploy_cost_up < gen.deploy_cost_down:
            warn(f"{tag}: deploy_cost_up below deploy_cost_down makes "
                 "deployment profitable in itself")

    line_ids = [l.id for l in case.lines]
    if len(set(line_ids)) != len(line_ids):
        err("line ids must be unique")
    for line in case.lines:
        tag = f"line {line.id}"
        if line.from_node == line.to_node:
            err(f"{tag}: from and to must differ")
        if line.from_node not in id_set or line.to_node not in id_set:
            err(f"{tag}: endpoint is not a known node")
        if not line.susceptance > 0:
            err(f"{tag}: susceptance must be positive")
        if not line.capacity > 0:
            err(f"{tag}: line capacity must be positive")

    if case.slack_node not in id_set:
        err(f"slack node {case.slack_node} does not exist")
    if not _connected(case):
        err("network not connected")

    margin = sum(g.p_max for g in case.generators)
    needed = sum(n.load for n in case.nodes) - sum(n.wind_forecast for n in case.nodes)
    if margin < needed:
        warn(f"total generation capacity {margin:g} MW cannot cover net load "
             f"{needed:g} MW; dispatch models will be infeasible")
    return diags


def _connected(case: GridCase) -> bool:
    if not case.nodes:
        return False
    adj: dict[int, list[int]] = {n.id: [] for n in case.nodes}
    for line in case.lines:
        if line.from_node in adj and line.to_node in adj:
            adj[line.from_node].append(line.to_node)
            adj[line.to_node].append(line.from_node)
    seen = {case.nodes[0].id}
    stack = [case.nodes[0].id]
    while stack:
        for nbr in adj[stack.pop()]:
            if nbr not in seen:
                seen.add(nbr)
                stack.append(nbr)
    return len(seen) == len(case.nodes)


def compute_ptdf(case: GridCase) -> PtdfMatrix:
    """Factorize the reduced nodal susceptance matrix into line PTDFs.

    The slack column is identically zero; for any balanced injection x,
    ``values @ x`` gives the DC line flows regardless of slack choice.
    """
    if not _connected(case):
        raise GridError("network not connected")
    n = case.n_nodes
    slack = case.node_index(case.slack_node)
    nl = len(case.lines)
    incidence = np.zeros((nl, n))
    suscept = np.empty(nl)
    for k, line in enumerate(case.lines):
        incidence[k, case.node_index(line.from_node)] = 1.0
        incidence[k, case.node_index(line.to_node)] = -1.0
        suscept[k] = line.susceptance
    laplacian = incidence.T @ (suscept[:, None] * incidence)
    keep = [i for i in range(n) if i != slack]
    reduced = laplacian[np.ix_(keep, keep)]
    # theta_keep = reduced^-1 @ x_keep; flows = diag(b) A theta
    try:
        inv = np.linalg.inv(reduced)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - connectivity checked
        raise GridError("singular susceptance matrix") from exc
    values = np.zeros((nl, n))
    values[:, keep] = (suscept[:, None] * incidence[:, keep]) @ inv
    return PtdfMatrix(values, slack)


def case_hash(case: GridCase) -> str:
    """Stable content hash used to tie scenario/solution files to a case."""
    return hashlib.sha256(dump_case_text(case).encode()).hexdigest()[:16]


# -- case file format ---------------------------------------------------------

_NODE_FIELDS = ("id", "load", "wind_forecast")
_GEN_FIELDS = ("node", "energy_cost", "res_cap_cost_up", "res_cap_cost_down",
               "deploy_cost_up", "deploy_cost_down", "p_min", "p_max",
               "res_limit_up", "res_limit_down")
_LINE_FIELDS = ("id", "from", "to", "susceptance", "capacity")
_META_FIELDS = ("slack_node", "mva_base", "name")


def dump_case_text(case: GridCase) -> str:
    doc = {
        "meta": {"slack_node": case.slack_node, "mva_base": case.mva_base,
                 "name": case.name},
        "nodes": [{"id": n.id, "load": n.load, "wind_forecast": n.wind_forecast}
                  for n in case.nodes],
        "generators": [{f: getattr(g, f) for f in _GEN_FIELDS}
                       for g in case.generators],
        "lines": [{"id": l.id, "from": l.from_node, "to": l.to_node,
                   "susceptance": l.susceptance, "capacity": l.capacity}
                  for l in case.lines],
    }
    return yaml.safe_dump(doc, sort_keys=False)


def save_case(case: GridCase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_case_text(case))


def _check_fields(entry: dict, allowed, where: str):
    unknown = set(entry) - set(allowed)
    if unknown:
        raise GridError(
            f"unknown field(s) {sorted(unknown)} in {where}; "
            f"allowed fields are {list(allowed)}")


def parse_case_text(text: str) -> GridCase:
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise GridError("case file must contain a mapping of sections")
    _check_fields(doc, ("meta", "nodes", "generators", "lines"), "case file")
    for section in ("meta", "nodes", "generators", "lines"):
        if section not in doc:
            raise GridError(f"case file is missing the {section!r} section")
    meta = doc["meta"]
    _check_fields(meta, _META_FIELDS, "meta section")
    if "slack_node" not in meta:
        raise GridError("meta section must define slack_node")
    nodes = []
    for entry in doc["nodes"]:
        _check_fields(entry, _NODE_FIELDS, f"nodes entry {entry}")
        nodes.append(Node(int(entry["id"]), float(entry.get("load", 0.0)),
                          float(entry.get("wind_forecast", 0.0))))
    gens = []
    for entry in doc["generators"]:
        _check_fields(entry, _GEN_FIELDS, f"generators entry {entry}")
        missing = [f for f in _GEN_FIELDS if f not in entry]
        if missing:
            raise GridError(f"generator entry missing fields {missing}")
        gens.append(Generator(node=int(entry["node"]),
                              **{f: float(entry[f]) for f in _GEN_FIELDS[1:]}))
    lines = []
    for entry in doc["lines"]:
        _check_fields(entry, _LINE_FIELDS, f"lines entry {entry}")
        missing = [f for f in _LINE_FIELDS if f not in entry]
        if missing:
            raise GridError(f"line entry missing fields {missing}")
        lines.append(Line(int(entry["id"]), int(entry["from"]), int(entry["to"]),
                          float(entry["susceptance"]), float(entry["capacity"])))
    return GridCase(tuple(nodes), tuple(gens), tuple(lines),
                    slack_node=int(meta["slack_node"]),
                    mva_base=float(meta.get("mva_base", 1.0)),
                    name=str(meta.get("name", "case")))


def load_case(path) -> GridCase:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_case_text(fh.read())
