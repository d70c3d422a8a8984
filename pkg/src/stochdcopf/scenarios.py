"""Wind forecast-error scenario sets and their sampling.

Forecast errors are zero-mean normal with per-node standard deviation
``sigma_factor * wind_forecast`` (no truncation: a negative total wind
realization is possible). Sampling is seeded and bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridCase


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class DistributionSpec:
    """Parameters of the forecast-error distribution."""

    sigma_factor: float = 0.15
    correlation: np.ndarray | None = None  # node-by-node, unit diagonal

    def __post_init__(self):
        if self.sigma_factor < 0:
            raise ScenarioError("sigma_factor must be non-negative")
        if self.correlation is not None:
            corr = np.asarray(self.correlation, dtype=float)
            corr.setflags(write=False)
            object.__setattr__(self, "correlation", corr)

    def describe(self) -> str:
        kind = "identity" if self.correlation is None else "custom"
        return f"normal sigma_factor={self.sigma_factor!r} correlation={kind}"


@dataclass(frozen=True)
class ScenarioSet:
    """Forecast-error atoms: ``errors[n, s]`` in MW with per-atom masses."""

    errors: np.ndarray
    probabilities: np.ndarray
    seed: int | None = None
    covariance_spec: str = "explicit atoms"
    case_hash: str = ""

    def __post_init__(self):
        errors = np.atleast_2d(np.asarray(self.errors, dtype=float))
        probs = np.asarray(self.probabilities, dtype=float)
        if errors.shape[1] != probs.shape[0]:
            raise ScenarioError("probability vector does not match scenario count")
        if errors.shape[1] < 1:
            raise ScenarioError("scenario set must contain at least one scenario")
        if not np.all(np.isfinite(errors)):
            raise ScenarioError("scenario errors must be finite")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ScenarioError("probabilities must sum to 1")
        errors.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "errors", errors)
        object.__setattr__(self, "probabilities", probs)

    @property
    def n_scenarios(self) -> int:
        return self.errors.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.errors.shape[0]

    def aggregates(self) -> np.ndarray:
        """System-wide aggregate error per scenario."""
        return self.errors.sum(axis=0)


def aggregate(scenario_set: ScenarioSet, s: int) -> float:
    """Aggregate forecast error of scenario ``s`` (sum over nodes)."""
    if not 0 <= s < scenario_set.n_scenarios:
        raise IndexError(f"scenario index {s} out of range "
                         f"(0..{scenario_set.n_scenarios - 1})")
    return float(scenario_set.errors[:, s].sum())


def fixed_set(errors, probabilities=None, case_hash: str = "") -> ScenarioSet:
    """Wrap explicitly given atoms, uniform masses by default."""
    rows = list(errors)
    if len(rows) == 0:
        raise ScenarioError("fixed_set needs a nonempty error matrix")
    lengths = {len(np.atleast_1d(r)) for r in rows}
    if len(lengths) != 1:
        raise ScenarioError("ragged error matrix: rows must have equal length")
    mat = np.array(rows, dtype=float)
    count = mat.shape[1]
    if count == 0:
        raise ScenarioError("fixed_set needs at least one scenario column")
    if probabilities is None:
        probabilities = np.full(count, 1.0 / count)
    return ScenarioSet(mat, np.asarray(probabilities, dtype=float),
                       seed=None, covariance_spec="explicit atoms",
                       case_hash=case_hash)


def sample(case: GridCase, spec: DistributionSpec, count: int, seed: int) -> ScenarioSet:
    """Draw ``count`` forecast-error scenarios for ``case``.

    Deterministic for a given (case, spec, count, seed); nodes without a
    wind forecast get identically zero error.
    """
    from .grid import case_hash as _hash
    if count < 1:
        raise ScenarioError("count must be at least 1")
    n = case.n_nodes
    sigma = spec.sigma_factor * case.wind_forecasts()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, count))
    if spec.correlation is not None:
        corr = np.asarray(spec.correlation, dtype=float)
        if corr.shape != (n, n):
            raise ScenarioError(f"correlation matrix must be {n}x{n}")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise ScenarioError("correlation matrix must be symmetric")
        if np.max(np.abs(np.diag(corr) - 1.0)) > 1e-12:
            raise ScenarioError("correlation matrix must have a unit diagonal")
        eigvals, eigvecs = np.linalg.eigh(corr)
        if eigvals.min() < -1e-10:
            raise ScenarioError("correlation matrix is not positive semidefinite")
        factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        z = factor @ z
    errors = sigma[:, None] * z
    probs = np.full(count, 1.0 / count)
    return ScenarioSet(errors, probs, seed=seed,
                       covariance_spec=spec.describe(), case_hash=_hash(case))


# -- scenario file format -----------------------------------------------------
# Header lines "# key value", then one row per node: node position followed
# by |S| error values, whitespace separated, repr-serialized so that the
# round trip is exact.

def dump_scenarios_text(scenario_set: ScenarioSet) -> str:
    lines = [
        f"# case_hash {scenario_set.case_hash or '-'}",
        f"# seed {scenario_set.seed if scenario_set.seed is not None else '-'}",
        f"# count {scenario_set.n_scenarios}",
        f"# spec {scenario_set.covariance_spec}",
    ]
    for row in scenario_set.errors:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_scenarios(scenario_set: ScenarioSet, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_scenarios_text(scenario_set))


def parse_scenarios_text(text: str) -> ScenarioSet:
    header: dict[str, str] = {}
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value.strip()
            continue
        rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ScenarioError("scenario file contains no data rows")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ScenarioError("scenario file rows have inconsistent lengths")
    seed_text = header.get("seed", "-")
    seed = None if seed_text in ("-", "None") else int(seed_text)
    errors = np.array(rows, dtype=float)
    count = errors.shape[1]
    declared = header.get("count")
    if declared is not None and int(declared) != count:
        raise ScenarioError(f"header count {declared} does not match "
                            f"{count} data columns")
    stored_hash = header.get("case_hash", "-")
    return ScenarioSet(errors, np.full(count, 1.0 / count), seed=seed,
                       covariance_spec=header.get("spec", "unknown"),
                       case_hash="" if stored_hash == "-" else stored_hash)


def load_scenarios(path) -> ScenarioSet:
    with open(path, "r", encoding="ascii") as fh:
        return parse_scenarios_text(fh.read())
