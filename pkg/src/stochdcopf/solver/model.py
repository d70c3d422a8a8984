"""Solver-agnostic representation of (mixed-integer) linear programs.

A LinearModel collects named, bounded variables and sparse linear
constraints and is sealed before solving; sealed models are immutable and
safe to share between concurrent solves.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

LE = "<="
EQ = "=="
GE = ">="

_SENSES = (LE, EQ, GE)


class ModelError(ValueError):
    """Malformed model: bad bounds, duplicate names, unknown variables."""


class SolverStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every solve (defaults per contract)."""

    feas: float = 1e-7       # max primal constraint/bound violation
    opt: float = 1e-8        # reduced-cost optimality threshold
    integrality: float = 1e-6  # distance from {0,1} accepted as integral
    gap_rel: float = 1e-9    # relative MILP optimality gap


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    obj: float = 0.0
    is_binary: bool = False


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    sense: str
    rhs: float


@dataclass
class LinearModel:
    """A minimization LP/MILP over named variables.

    Build with :meth:`add_var` and :meth:`add_constr`, then :meth:`seal`.
    Sealing validates the model and freezes it; all solver entry points
    require a sealed model.
    """

    name: str = "model"
    objective_offset: float = 0.0
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _sealed: bool = field(default=False, repr=False)

    def add_var(self, name, lb=0.0, ub=math.inf, obj=0.0, binary=False) -> str:
        self._mutable()
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if binary:
            lb, ub = max(0.0, lb), min(1.0, ub)
        if not lb <= ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), float(obj), binary))
        return name

    def add_constr(self, name, coeffs, sense, rhs) -> str:
        self._mutable()
        if sense not in _SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        if any(c.name == name for c in self.constraints):
            raise ModelError(f"duplicate constraint name {name!r}")
        items = tuple((v, float(c)) for v, c in
                      (coeffs.items() if isinstance(coeffs, dict) else coeffs))
        self.constraints.append(Constraint(name, items, sense, float(rhs)))
        return name

    def seal(self) -> "LinearModel":
        """Validate and freeze the model; returns self for chaining."""
        if self._sealed:
            return self
        for con in self.constraints:
            for vname, coef in con.coeffs:
                if vname not in self._index:
                    raise ModelError(
                        f"constraint {con.name!r} references unknown variable {vname!r}")
                if not math.isfinite(coef):
                    raise ModelError(f"constraint {con.name!r} has non-finite coefficient")
            if not math.isfinite(con.rhs):
                raise ModelError(f"constraint {con.name!r} has non-finite rhs")
        for var in self.variables:
            if var.is_binary and not (var.lb >= 0.0 and var.ub <= 1.0):
                raise ModelError(f"binary variable {var.name!r} has bounds outside [0,1]")
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    def _mutable(self):
        if self._sealed:
            raise ModelError("model is sealed; build a new model instead of mutating")

    def var_index(self, name: str) -> int:
        return self._index[name]

    @property
    def binary_names(self) -> list[str]:
        return [v.name for v in self.variables if v.is_binary]

    # -- derived array views used by the backends ----------------------------

    def to_arrays(self):
        """Compile to (c, A, senses, b, lb, ub, is_binary) dense arrays."""
        n = len(self.variables)
        m = len(self.constraints)
        c = np.array([v.obj for v in self.variables], dtype=float)
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        binary = np.array([v.is_binary for v in self.variables], dtype=bool)
        A = np.zeros((m, n))
        b = np.empty(m)
        senses = []
        for i, con in enumerate(self.constraints):
            for vname, coef in con.coeffs:
                A[i, self._index[vname]] += coef
            b[i] = con.rhs
            senses.append(con.sense)
        return c, A, senses, b, lb, ub, binary

    def copy_unsealed(self) -> "LinearModel":
        out = LinearModel(name=self.name, objective_offset=self.objective_offset)
        out.variables = list(self.variables)
        out.constraints = list(self.constraints)
        out._index = dict(self._index)
        return out

    def with_rhs(self, updates: dict[str, float]) -> "LinearModel":
        """Sealed copy with the named constraints' right-hand sides replaced."""
        out = self.copy_unsealed()
        out.constraints = [
            replace(con, rhs=float(updates[con.name])) if con.name in updates else con
            for con in out.constraints
        ]
        return out.seal()

    def with_bounds(self, updates: dict[str, tuple[float, float]]) -> "LinearModel":
        """Sealed copy with the named variables' bounds replaced."""
        out = self.copy_unsealed()
        out.variables = [
            replace(v, lb=float(updates[v.name][0]), ub=float(updates[v.name][1]))
            if v.name in updates else v
            for v in out.variables
        ]
        return out.seal()


@dataclass(frozen=True)
class SolveResult:
    status: SolverStatus
    objective: float = math.nan
    primal: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] | None = None
    gap: float = math.nan
    iterations: int = 0
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def has_incumbent(self) -> bool:
        return bool(self.primal)


def relax_binaries(model: LinearModel) -> LinearModel:
    """Copy of ``model`` with every binary flag cleared, bounds kept."""
    out = model.copy_unsealed()
    out.variables = [replace(v, is_binary=False) for v in out.variables]
    return out.seal() if model.sealed else out


def fix_binaries(model: LinearModel, values: dict[str, float]) -> LinearModel:
    """Copy with the given binaries fixed to 0/1 (continuous elsewhere)."""
    out = model.copy_unsealed()
    fixed = {}
    for name, val in values.items():
        v = round(val)
        if v not in (0, 1):
            raise ModelError(f"cannot fix binary {name!r} to {val}")
        fixed[name] = float(v)
    out.variables = [
        replace(v, lb=fixed[v.name], ub=fixed[v.name]) if v.name in fixed else v
        for v in out.variables
    ]
    return out.seal() if model.sealed else out
