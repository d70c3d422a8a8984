"""Write-only MPS emitter for cross-checking models with external solvers.

Fixed-column field layout; names longer than the classic 8 characters
overflow their field, which every modern reader accepts.
"""

from __future__ import annotations

import math

from .model import EQ, GE, LE, LinearModel

_OBJ = "COST"
_SENSE_CODE = {LE: "L", GE: "G", EQ: "E"}


def _fields(f1="", f2="", f3="", f4="", f5="", f6=""):
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}   {f5:<8}  {f6:<12}"
    return line.rstrip()


def write_mps(model: LinearModel, path) -> None:
    """Dump ``model`` in MPS form at ``path``."""
    lines = [f"NAME          {model.name}", "ROWS", _fields("N", _OBJ)]
    for con in model.constraints:
        lines.append(_fields(_SENSE_CODE[con.sense], con.name))

    by_var: dict[str, list[tuple[str, float]]] = {v.name: [] for v in model.variables}
    for con in model.constraints:
        for vname, coef in con.coeffs:
            by_var[vname].append((con.name, coef))

    lines.append("COLUMNS")
    in_integer_block = False
    marker = 0
    for var in model.variables:
        if var.is_binary != in_integer_block:
            kind = "'INTORG'" if var.is_binary else "'INTEND'"
            lines.append(_fields("", f"MARKER{marker}", "'MARKER'", "", kind))
            marker += 1
            in_integer_block = var.is_binary
        entries = [(_OBJ, var.obj)] + by_var[var.name]
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                (r1, c1), (r2, c2) = pair
                lines.append(_fields("", var.name, r1, repr(c1), r2, repr(c2)))
            else:
                (r1, c1), = pair
                lines.append(_fields("", var.name, r1, repr(c1)))
    if in_integer_block:
        lines.append(_fields("", f"MARKER{marker}", "'MARKER'", "", "'INTEND'"))

    lines.append("RHS")
    if model.objective_offset:
        lines.append(_fields("", "RHS", _OBJ, repr(-model.objective_offset)))
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(_fields("", "RHS", con.name, repr(con.rhs)))

    lines.append("BOUNDS")
    for var in model.variables:
        if var.is_binary:
            lines.append(_fields("BV", "BND", var.name))
            continue
        if var.lb == var.ub:
            lines.append(_fields("FX", "BND", var.name, repr(var.lb)))
            continue
        if math.isinf(var.lb):
            lines.append(_fields("MI", "BND", var.name))
        elif var.lb != 0.0:
            lines.append(_fields("LO", "BND", var.name, repr(var.lb)))
        if math.isinf(var.ub):
            if math.isinf(var.lb):
                lines.append(_fields("PL", "BND", var.name))
        else:
            lines.append(_fields("UP", "BND", var.name, repr(var.ub)))
    lines.append("ENDATA")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
