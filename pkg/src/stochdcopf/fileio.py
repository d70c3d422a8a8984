"""Solution-file serialization (first-stage dispatch plus metadata).

Key-value header followed by per-generator vector rows; floats are
repr-serialized so a load/dump round trip is exact.
"""

from __future__ import annotations

import numpy as np

from .formulations import DispatchSolution


class SolutionFileError(ValueError):
    pass


_VECTORS = ("p", "beta", "ru", "rd")


def dump_solution_text(solution: DispatchSolution, *, method: str = "-",
                       epsilon: float | None = None, case_hash: str = "",
                       seed=None, status: str = "optimal",
                       solve_seconds: float | None = None) -> str:
    lines = [
        "# stochdcopf solution (first stage)",
        f"case_hash {case_hash or '-'}",
        f"method {method}",
        f"epsilon {repr(epsilon) if epsilon is not None else '-'}",
        f"seed {seed if seed is not None else '-'}",
        f"status {status}",
        f"solve_seconds {repr(solve_seconds) if solve_seconds is not None else '-'}",
        f"objective {repr(solution.objective)}",
        f"gens {solution.n_gens}",
    ]
    arrays = dict(zip(_VECTORS, (solution.p, solution.beta,
                                 solution.r_cap_up, solution.r_cap_down)))
    for key, arr in arrays.items():
        for g, val in enumerate(arr):
            lines.append(f"{key} {g} {repr(float(val))}")
    return "\n".join(lines) + "\n"


def save_solution(solution: DispatchSolution, path, **meta) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_solution_text(solution, **meta))


def parse_solution_text(text: str):
    """Returns (DispatchSolution with first-stage fields, metadata dict)."""
    meta: dict[str, str] = {}
    vectors: dict[str, dict[int, float]] = {key: {} for key in _VECTORS}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] in vectors and len(parts) == 3:
            vectors[parts[0]][int(parts[1])] = float(parts[2])
        else:
            key, _, value = line.partition(" ")
            meta[key] = value.strip()
    if "gens" not in meta:
        raise SolutionFileError("solution file is missing the gens count")
    n_g = int(meta["gens"])
    arrays = {}
    for key in _VECTORS:
        got = vectors[key]
        if sorted(got) != list(range(n_g)):
            raise SolutionFileError(f"solution file has incomplete {key!r} vector")
        arrays[key] = np.array([got[g] for g in range(n_g)])
    if "objective" not in meta:
        raise SolutionFileError("solution file is missing the objective")
    solution = DispatchSolution(arrays["p"], arrays["beta"], arrays["ru"],
                                arrays["rd"], float(meta["objective"]))
    return solution, meta


def load_solution(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_solution_text(fh.read())
