"""Command-line entry point: scenario generation, solving, out-of-sample
evaluation, experiment orchestration, and report/figure emission.

Exit codes: 0 success, 2 usage errors, 3 infeasible models,
4 solver node/time limits.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import cases as bundled_cases
from .alsox import HeuristicConfig, HeuristicError, solve_amgc_heuristic
from .evaluator import (default_penalty, dump_report_text, evaluate,
                        parse_report_text)
from .fileio import load_solution, save_solution
from .formulations import (RiskConfig, build_agc_jcc, build_agc_robust,
                           build_amgc_saa, extract_solution,
                           reserve_quantile_cuts, screen_line_limits)
from .grid import case_hash, compute_ptdf, load_case, save_case, validate_case
from .scenarios import (DistributionSpec, load_scenarios, sample,
                        save_scenarios)
from .solver import SolverStatus, solve_lp, solve_milp, write_mps

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4

METHODS = ("agc-robust", "agc-jcc", "amgc", "amgc-h")

_LIMIT_STATUSES = (SolverStatus.ITERATION_LIMIT, SolverStatus.TIME_LIMIT)


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="stochdcopf",
        description="Stochastic DC-OPF with automatic and manual reserves")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("export-case", help="write a bundled case file")
    p.add_argument("--name", required=True, choices=sorted(bundled_cases.BUNDLED))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_case)

    p = sub.add_parser("gen-scenarios", help="sample a scenario file")
    p.add_argument("--case", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sigma-factor", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_scenarios)

    p = sub.add_parser("solve", help="schedule energy and reserves")
    p.add_argument("--case", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--no-screening", action="store_true")
    p.add_argument("--no-cuts", action="store_true")
    p.add_argument("--delta", type=float, default=1.0,
                   help="bisection stopping tolerance (amgc-h)")
    p.add_argument("--time-limit", type=float, default=36000.0)
    p.add_argument("--engine", default="highs", choices=("bundled", "highs"))
    p.add_argument("--out", required=True)
    p.add_argument("--dump-model", default=None,
                   help="also write the model in MPS form")
    p.add_argument("--screening-report", default=None)
    p.add_argument("--alsox-log", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="out-of-sample recourse evaluation")
    p.add_argument("--case", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--scenarios", required=True,
                   help="out-of-sample scenario file")
    p.add_argument("--penalty", type=float, default=None)
    p.add_argument("--engine", default="highs", choices=("bundled", "highs"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="summary table and cost/deviation scatter")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("experiment", help="full protocol: sample, solve, evaluate")
    p.add_argument("--case", required=True)
    p.add_argument("--methods", default=",".join(METHODS),
                   help="comma-separated subset of " + ",".join(METHODS))
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--in-samples", type=int, default=1000)
    p.add_argument("--out-samples", type=int, default=100000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--penalty", type=float, default=None)
    p.add_argument("--sigma-factor", type=float, default=0.15)
    p.add_argument("--no-screening", action="store_true")
    p.add_argument("--no-cuts", action="store_true")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--time-limit", type=float, default=36000.0)
    p.add_argument("--engine", default="highs", choices=("bundled", "highs"))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def _load_valid_case(path):
    case = load_case(path)
    errors = [d for d in validate_case(case) if d.level == "error"]
    if errors:
        raise CliError("invalid case: " + "; ".join(d.message for d in errors))
    return case


def cmd_export_case(args) -> int:
    save_case(bundled_cases.load_bundled(args.name), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_gen_scenarios(args) -> int:
    if args.count < 1:
        raise CliError("--count must be at least 1")
    case = _load_valid_case(args.case)
    spec = DistributionSpec(sigma_factor=args.sigma_factor)
    scen = sample(case, spec, args.count, args.seed)
    save_scenarios(scen, args.out)
    print(f"wrote {args.out} ({scen.n_scenarios} scenarios, seed {args.seed})")
    return EXIT_OK


def _solve_method(case, scen, ptdf, method, epsilon, *, engine="highs",
                  use_screening=True, use_cuts=True, delta=1.0,
                  time_limit=None, screening=None):
    """Dispatch to the right builder/heuristic.

    Returns (solution, status, screening_report, heuristic_result).
    """
    risk = RiskConfig(epsilon, scen.n_scenarios,
                      enable_screening=use_screening, enable_cuts=use_cuts)
    if screening is None and use_screening:
        screening = screen_line_limits(case, scen, ptdf, backend=engine)
    cuts = (reserve_quantile_cuts(scen, risk)
            if use_cuts and risk.q < scen.n_scenarios else None)
    heur = None
    if method == "agc-robust":
        model = build_agc_robust(case, scen, ptdf, screening=screening,
                                 cuts=cuts)
        result = solve_lp(model, backend=engine)
    elif method == "agc-jcc":
        model = build_agc_jcc(case, scen, ptdf, risk, screening=screening,
                              cuts=cuts)
        result = solve_milp(model, time_limit=time_limit, backend=engine)
    elif method == "amgc":
        model = build_amgc_saa(case, scen, ptdf, risk, screening=screening,
                               cuts=cuts)
        result = solve_milp(model, time_limit=time_limit, backend=engine)
    elif method == "amgc-h":
        heur = solve_amgc_heuristic(case, scen, ptdf, risk,
                                    HeuristicConfig(delta=delta),
                                    screening=screening, cuts=cuts,
                                    backend=engine)
        return heur.solution, SolverStatus.OPTIMAL, screening, heur
    else:
        raise CliError(f"unknown method {method!r}")
    if result.status is SolverStatus.INFEASIBLE:
        raise CliError(f"{method} model is infeasible", EXIT_INFEASIBLE)
    if result.status in _LIMIT_STATUSES and not result.has_incumbent:
        raise CliError(f"{method} hit {result.status.value} with no incumbent",
                       EXIT_LIMIT)
    if not (result.is_optimal or result.has_incumbent):
        raise CliError(f"{method} solve failed: {result.status.value}",
                       EXIT_LIMIT)
    solution = extract_solution(model, result, case, scen,
                                risk if method != "agc-robust" else None)
    return solution, result.status, screening, heur


def cmd_solve(args) -> int:
    case = _load_valid_case(args.case)
    scen = load_scenarios(args.scenarios)
    chash = case_hash(case)
    if scen.case_hash and scen.case_hash != chash:
        raise CliError("scenario file was generated for a different case")
    ptdf = compute_ptdf(case)
    t0 = time.monotonic()
    try:
        solution, status, screening, heur = _solve_method(
            case, scen, ptdf, args.method, args.epsilon, engine=args.engine,
            use_screening=not args.no_screening, use_cuts=not args.no_cuts,
            delta=args.delta, time_limit=args.time_limit)
    except HeuristicError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE)
    elapsed = time.monotonic() - t0
    save_solution(solution, args.out, method=args.method,
                  epsilon=args.epsilon if args.method != "agc-robust" else None,
                  case_hash=chash, seed=scen.seed, status=status.value,
                  solve_seconds=round(elapsed, 3))
    if args.dump_model:
        risk = RiskConfig(args.epsilon, scen.n_scenarios)
        builder = {"agc-robust": lambda: build_agc_robust(case, scen, ptdf),
                   "agc-jcc": lambda: build_agc_jcc(case, scen, ptdf, risk),
                   "amgc": lambda: build_amgc_saa(case, scen, ptdf, risk),
                   "amgc-h": lambda: build_amgc_saa(case, scen, ptdf, risk)}
        write_mps(builder[args.method](), args.dump_model)
    if args.screening_report and screening is not None:
        Path(args.screening_report).write_text(screening.to_text())
    if args.alsox_log and heur is not None:
        Path(args.alsox_log).write_text(heur.log_text())
    print(f"{args.method}: {status.value}, objective {solution.objective!r}, "
          f"{elapsed:.2f}s -> {args.out}")
    return EXIT_LIMIT if status in _LIMIT_STATUSES else EXIT_OK


def cmd_evaluate(args) -> int:
    case = _load_valid_case(args.case)
    solution, meta = load_solution(args.solution)
    out_set = load_scenarios(args.scenarios)
    chash = case_hash(case)
    for tag, stored in (("solution", meta.get("case_hash", "-")),
                        ("scenario", out_set.case_hash or "-")):
        if stored not in ("-", "") and stored != chash:
            raise CliError(f"{tag} file was generated for a different case")
    ptdf = compute_ptdf(case)
    penalty = args.penalty if args.penalty is not None else default_penalty(case)
    report = evaluate(solution, case, ptdf, out_set, penalty,
                      backend=args.engine)
    text = dump_report_text(report, case_hash=chash,
                            method=meta.get("method", "-"),
                            epsilon=None if meta.get("epsilon", "-") == "-"
                            else float(meta["epsilon"]),
                            seed=out_set.seed)
    Path(args.out).write_text(text)
    print(f"evaluated {out_set.n_scenarios} scenarios: "
          f"A={report.frac_agc:.4f} M={report.frac_manual:.4f} "
          f"D={report.frac_deviation:.4f} E[C]={report.expected_cost:.2f} "
          f"-> {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    case_hashes = set()
    for path in args.reports:
        header, report = parse_report_text(Path(path).read_text())
        case_hashes.add(header.get("case_hash", "-"))
        rows.append((header.get("method", "-"), report))
    if len(case_hashes) > 1:
        raise CliError("reports mix different cases: " +
                       ", ".join(sorted(case_hashes)))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "summary.txt"
    summary_path.write_text(_summary_text(rows))
    figure_path = out_dir / "scatter.svg"
    _write_scatter(rows, figure_path)
    print(f"wrote {summary_path} and {figure_path}")
    return EXIT_OK


def _summary_text(rows) -> str:
    methods = []
    for method, _ in rows:
        if method not in methods:
            methods.append(method)
    lines = ["# method reports frac_agc frac_manual frac_deviation "
             "expected_cost top5_deviation"]
    for method in methods:
        reps = [rep for m, rep in rows if m == method]
        mean = lambda f: repr(float(np.mean([f(r) for r in reps])))
        lines.append(" ".join([
            method, str(len(reps)),
            mean(lambda r: r.frac_agc), mean(lambda r: r.frac_manual),
            mean(lambda r: r.frac_deviation), mean(lambda r: r.expected_cost),
            mean(lambda r: r.top5_deviation),
        ]))
    return "\n".join(lines) + "\n"


_METHOD_STYLE = {
    "agc-robust": ("tab:blue", "o"),
    "agc-jcc": ("tab:red", "s"),
    "amgc": ("tab:green", "^"),
    "amgc-h": ("tab:orange", "v"),
}


def _write_scatter(rows, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "stochdcopf"
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    seen = set()
    for method, report in rows:
        color, marker = _METHOD_STYLE.get(method, ("tab:gray", "x"))
        label = method if method not in seen else None
        seen.add(method)
        ax.scatter([report.top5_deviation], [report.expected_cost],
                   c=color, marker=marker, label=label)
    ax.set_xlabel("mean deviation of the 5% worst scenarios (MW)")
    ax.set_ylabel("expected real-time cost (EUR)")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_experiment(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise CliError(f"unknown method(s) {unknown}; choose from {METHODS}")
    if args.reps < 1 or args.in_samples < 1 or args.out_samples < 1:
        raise CliError("counts and reps must be at least 1")
    case = _load_valid_case(args.case)
    chash = case_hash(case)
    ptdf = compute_ptdf(case)
    spec = DistributionSpec(sigma_factor=args.sigma_factor)
    penalty = args.penalty if args.penalty is not None else default_penalty(case)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report_paths = []
    limit_seen = False
    for rep in range(args.reps):
        in_seed = args.seed + rep
        out_seed = args.seed + 100000 + rep
        scen = sample(case, spec, args.in_samples, in_seed)
        out_set = sample(case, spec, args.out_samples, out_seed)
        save_scenarios(scen, out_dir / f"rep{rep}_in.scen")
        save_scenarios(out_set, out_dir / f"rep{rep}_out.scen")
        screening = (screen_line_limits(case, scen, ptdf, backend=args.engine)
                     if not args.no_screening else None)
        for method in methods:
            t0 = time.monotonic()
            try:
                solution, status, _, heur = _solve_method(
                    case, scen, ptdf, method, args.epsilon, engine=args.engine,
                    use_screening=not args.no_screening,
                    use_cuts=not args.no_cuts, delta=args.delta,
                    time_limit=args.time_limit, screening=screening)
            except HeuristicError as exc:
                raise CliError(f"rep {rep} {method}: {exc}", EXIT_INFEASIBLE)
            elapsed = time.monotonic() - t0
            limit_seen |= status in _LIMIT_STATUSES
            sol_path = out_dir / f"rep{rep}_{method}.sol"
            save_solution(solution, sol_path, method=method,
                          epsilon=args.epsilon if method != "agc-robust" else None,
                          case_hash=chash, seed=in_seed, status=status.value,
                          solve_seconds=round(elapsed, 3))
            if heur is not None:
                (out_dir / f"rep{rep}_{method}.alsox").write_text(heur.log_text())
            report = evaluate(solution.first_stage_only(), case, ptdf, out_set,
                              penalty, backend=args.engine)
            rep_path = out_dir / f"rep{rep}_{method}.report"
            rep_path.write_text(dump_report_text(
                report, case_hash=chash, method=method,
                epsilon=args.epsilon if method != "agc-robust" else None,
                seed=out_seed))
            report_paths.append(str(rep_path))
            print(f"rep {rep} {method}: obj {solution.objective:.2f} "
                  f"[{status.value}] A={report.frac_agc:.4f} "
                  f"M={report.frac_manual:.4f} D={report.frac_deviation:.4f} "
                  f"E[C]={report.expected_cost:.2f} ({elapsed:.1f}s)")
    report_args = argparse.Namespace(reports=report_paths,
                                     out_dir=str(out_dir))
    cmd_report(report_args)
    return EXIT_LIMIT if limit_seen else EXIT_OK
