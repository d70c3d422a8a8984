"""Stochastic DC-OPF scheduling of energy, automatic (AGC) reserve, and
manual reserve under wind uncertainty, with out-of-sample recourse
evaluation."""

from .alsox import HeuristicConfig, HeuristicResult, solve_amgc_heuristic
from .cases import load_bundled, synthetic24, three_bus, three_bus_atoms
from .evaluator import (EvaluationRecord, EvaluationReport, classify,
                        default_penalty, evaluate, realtime_recourse)
from .formulations import (DispatchSolution, RiskConfig, ScreeningReport,
                           build_agc_jcc, build_agc_robust, build_amgc_saa,
                           check_solution, extract_solution,
                           reserve_quantile_cuts, screen_line_limits)
from .grid import (Generator, GridCase, Line, Node, PtdfMatrix, case_hash,
                   compute_ptdf, load_case, save_case, validate_case)
from .scenarios import (DistributionSpec, ScenarioSet, aggregate, fixed_set,
                        load_scenarios, sample, save_scenarios)
from .solver import (LinearModel, SolveResult, SolverStatus, Tolerances,
                     relax_binaries, solve_lp, solve_milp, write_mps)

__version__ = "0.1.0"
