"""Command line interface: ``solve``, ``experiment`` and ``validate``.

Exit codes of ``solve``: 0 optimal, 2 infeasibility certificate, 3 iteration
limit, 4 input or parameter error, 5 numerical failure. ``validate`` exits
with 1 when any property fails; ``experiment`` exits with 0 unless its
arguments are invalid (4).
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .ipm import (
    CERTIFICATE,
    ITERATION_LIMIT,
    NUMERICAL_FAILURE,
    OPTIMAL,
    ParameterError,
    PreconditionError,
    SolveParams,
    run_feasible,
    run_infeasible,
    write_iteration_log,
)
from .lp_core import (
    GenerationError,
    NoStrictlyFeasiblePoint,
    ParseError,
    find_strict_start,
    generate_bounded_optimal_instance,
    generate_feasible_instance,
    read_lp,
    validate_rank,
)
from .scaled_newton import (
    CONDITION_VARIANTS,
    FEASIBLE,
    INFEASIBLE,
    InnerControls,
    exact_directions,
    relative_error_report,
)
from .validation import SUITES, run_suites

EXIT_OPTIMAL = 0
EXIT_PROPERTY_FAILED = 1
EXIT_CERTIFICATE = 2
EXIT_ITERATION_LIMIT = 3
EXIT_INPUT_ERROR = 4
EXIT_NUMERICAL_FAILURE = 5

STATUS_EXIT = {
    OPTIMAL: EXIT_OPTIMAL,
    CERTIFICATE: EXIT_CERTIFICATE,
    ITERATION_LIMIT: EXIT_ITERATION_LIMIT,
    NUMERICAL_FAILURE: EXIT_NUMERICAL_FAILURE,
}

SUMMARY_COLUMNS = (
    "instance", "mode", "condition", "kappa", "nu", "status",
    "outer_iters", "total_cg_iters", "final_gap", "wall_ms",
)
DETAIL_COLUMNS = (
    "instance", "m", "n", "seed", "mode", "condition", "kappa", "nu", "delta", "phi0",
    "iteration_bound", "status", "outer_iters", "total_cg_iters", "fallbacks",
    "median_xi_threshold", "median_norm_xi", "final_gap",
)
DIAGNOSTIC_COLUMNS = (
    "k", "norm_xi", "norm_r", "cond6a_lhs", "cond6a_rhs", "cond6b_lhs", "cond6b_rhs",
    "cond6c_lhs", "cond6c_rhs", "cg_iters", "rel_err_du", "rel_err_dv", "rel_err_bound",
    "degenerate",
)


class InputError(ValueError):
    pass


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _sizes(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        m, n = tok.lower().split("x")
        out.append((int(m), int(n)))
    return out


def _generate_spec(text):
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--generate expects m,n,seed")
    return tuple(parts)


def _add_solver_options(p):
    p.add_argument("--mode", choices=(FEASIBLE, INFEASIBLE), default=FEASIBLE)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=None, help="default sqrt(n)")
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--rho", type=float, default=None,
                   help="starting scale and certificate radius (required in infeasible mode)")
    p.add_argument("--condition", choices=CONDITION_VARIANTS, default="paper")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--max-outer", type=int, default=None)
    p.add_argument("--cg-max", type=int, default=None, help="inner CG iteration cap (default 10 m)")
    p.add_argument("--preconditioner", choices=("diagonal", "basis"), default="diagonal")
    p.add_argument("--break-lift", action="store_true", help=argparse.SUPPRESS)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="inexact-ipm",
        description="Inexact potential reduction interior point methods for LP.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one LP")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="MPS (.mps) or triplet-format file")
    src.add_argument("--generate", type=_generate_spec, metavar="M,N,SEED")
    p.add_argument("--generator", choices=("feasible", "bounded"), default=None,
                   help="instance family for --generate (default: feasible for feasible mode, "
                        "bounded for infeasible mode)")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--rho-target", type=float, default=10.0)
    p.add_argument("--diagnostics", action="store_true",
                   help="also write diagnostics.csv with oracle relative errors")
    _add_solver_options(p)

    p = sub.add_parser("experiment", help="seeded sweep over kappa, condition variant and size")
    p.add_argument("--seeds", type=_int_list, default=[1, 2, 3])
    p.add_argument("--kappas", type=_float_list, default=[0.0, 0.3, 0.6, 0.9])
    p.add_argument("--conditions", default="paper",
                   help="comma-separated subset of paper,monteiro,gondzio")
    p.add_argument("--sizes", type=_sizes, default=[(10, 30)], metavar="MxN,...")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--rho-target", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall_ms empty so repeated runs give byte-identical files")
    _add_solver_options(p)

    p = sub.add_parser("validate", help="run the oracle-comparison property suites")
    p.add_argument("--seeds", type=int, default=100, help="number of seeded instances")
    p.add_argument("--suite", action="append", choices=SUITES,
                   help="run only this suite (repeatable)")
    p.add_argument("--samples", type=int, default=1000, help="samples for the sampling suites")
    p.add_argument("--break-lift", action="store_true", help=argparse.SUPPRESS)
    return parser


def _params(args, rho=None):
    if not 0.0 <= args.kappa < 1.0:
        raise InputError(f"--kappa must lie in [0, 1), got {args.kappa}")
    if args.eps <= 0:
        raise InputError("--eps must be positive")
    inner = InnerControls(
        max_iters=args.cg_max,
        preconditioner=args.preconditioner,
        condition=args.condition,
        sigma=args.sigma,
        gamma=args.gamma,
        eta=args.eta,
        break_lift=args.break_lift,
    )
    return SolveParams(
        nu=args.nu, kappa=args.kappa, epsilon=args.eps,
        rho=rho if rho is not None else 1e4, max_outer=args.max_outer, inner=inner,
    )


def _check_variant_params(args):
    for name in ("sigma", "gamma", "eta"):
        v = getattr(args, name)
        if not 0.0 < v < 1.0:
            raise InputError(f"--{name} must lie in (0, 1), got {v}")


def _load_problem(args):
    """Return ``(lp, start)``; ``start`` is None in infeasible mode."""
    if args.input is not None:
        try:
            lp = read_lp(args.input)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from None
        report = validate_rank(lp)
        if not report.full_rank:
            raise InputError(
                f"constraint matrix is not of full row rank (rank {report.rank} < m = {lp.num_rows})"
            )
        if args.mode == INFEASIBLE:
            return lp, None
        try:
            return lp, find_strict_start(lp)
        except NoStrictlyFeasiblePoint as exc:
            raise InputError(f"feasible mode needs a strictly feasible point: {exc}") from None
    m, n, seed = args.generate
    family = args.generator or ("feasible" if args.mode == FEASIBLE else "bounded")
    try:
        if family == "feasible":
            inst = generate_feasible_instance(seed, m, n, args.density)
        else:
            inst = generate_bounded_optimal_instance(seed, m, n, args.rho_target, args.density)
    except (ValueError, GenerationError) as exc:
        raise InputError(str(exc)) from None
    if args.mode == FEASIBLE and inst.strict_start is None:
        try:
            return inst.lp, find_strict_start(inst.lp)
        except NoStrictlyFeasiblePoint as exc:
            raise InputError(str(exc)) from None
    return inst.lp, inst.strict_start


def _solve(lp, start, mode, params, callback=None):
    if mode == FEASIBLE:
        return run_feasible(lp, start, params, callback=callback)
    return run_infeasible(lp, params, callback=callback)


def _summary_row(name, mode, condition, result, timing=True):
    return [
        name, mode, condition, result.kappa, result.nu, result.status,
        result.iterations, result.total_cg_iterations, result.gap,
        int(round(result.wall_time * 1000)) if timing else None,
    ]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def cmd_solve(args):
    try:
        _check_variant_params(args)
        if args.mode == INFEASIBLE and args.rho is None:
            raise InputError("--rho is required in infeasible mode")
        if args.rho is not None and args.rho <= 0:
            raise InputError("--rho must be positive")
        params = _params(args, args.rho)
        lp, start = _load_problem(args)
        params.validate(args.mode, lp.num_cols)
    except (InputError, ParseError, ParameterError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    diagnostics = []

    def diagnose(k, sys_, direction, report, stats):
        rel = relative_error_report(direction, exact_directions(sys_), params.kappa)
        diagnostics.append([
            k, float(np.linalg.norm(direction.xi)), float(np.linalg.norm(sys_.r)),
            report.lhs_6a, report.rhs_6a, report.lhs_6b, report.rhs_6b,
            report.lhs_6c, report.rhs_6c, stats.cg_iterations,
            rel.rel_err_du, rel.rel_err_dv, rel.bound, rel.degenerate,
        ])

    try:
        result = _solve(lp, start, args.mode, params, diagnose if args.diagnostics else None)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "iterations.csv"), "w", newline="") as fh:
        write_iteration_log(result, fh)
    row = _summary_row(lp.name, args.mode, args.condition, result)
    _write_csv(os.path.join(args.out, "summary.csv"), SUMMARY_COLUMNS, [row])
    if args.diagnostics:
        _write_csv(os.path.join(args.out, "diagnostics.csv"), DIAGNOSTIC_COLUMNS, diagnostics)
    print(
        f"status={result.status} iterations={result.iterations} "
        f"final_gap={result.gap:.6e} wall_ms={row[-1]}"
    )
    if result.message:
        print(result.message, file=sys.stderr)
    return STATUS_EXIT[result.status]


def _experiment_cell(cell):
    (m, n), kappa, condition, seed, opts = cell
    mode = opts["mode"]
    if mode == FEASIBLE:
        inst = generate_feasible_instance(seed, m, n, opts["density"])
    else:
        inst = generate_bounded_optimal_instance(seed, m, n, opts["rho_target"], opts["density"])
    name = inst.lp.name
    inner = InnerControls(max_iters=opts["cg_max"], preconditioner=opts["preconditioner"],
                          condition=condition, sigma=opts["sigma"], gamma=opts["gamma"],
                          eta=opts["eta"])
    params = SolveParams(nu=opts["nu"], kappa=kappa, epsilon=opts["eps"], rho=opts["rho"],
                         max_outer=opts["max_outer"], inner=inner)
    try:
        result = _solve(inst.lp, inst.strict_start, mode, params)
    except Exception as exc:  # recorded per row, the sweep continues
        nu = params.nu_for(n)
        summary = [name, mode, condition, kappa, nu, f"error: {exc}", 0, 0, None, None]
        detail = [name, m, n, seed, mode, condition, kappa, nu, params.delta(mode, n), None,
                  None, f"error: {exc}", 0, 0, 0, None, None, None]
        return summary, detail
    if condition == "paper":
        thresholds = [rec.cond6b_rhs for rec in result.log]
    else:
        thresholds = [rec.variant_rhs for rec in result.log]
    norms = [rec.norm_xi for rec in result.log]
    summary = _summary_row(name, mode, condition, result, timing=not opts["no_timing"])
    detail = [
        name, m, n, seed, mode, condition, kappa, result.nu, result.delta, result.phi0,
        result.iteration_bound, result.status, result.iterations, result.total_cg_iterations,
        sum(rec.fallback for rec in result.log),
        float(np.median(thresholds)) if thresholds else None,
        float(np.median(norms)) if norms else None,
        result.gap,
    ]
    return summary, detail


def experiment_cells(args):
    conditions = [c.strip() for c in args.conditions.split(",") if c.strip()]
    bad = [c for c in conditions if c not in CONDITION_VARIANTS]
    if bad:
        raise InputError(f"unknown condition variant(s): {', '.join(bad)}")
    for kappa in args.kappas:
        if not 0.0 <= kappa < 1.0:
            raise InputError(f"kappa values must lie in [0, 1), got {kappa}")
    _check_variant_params(args)
    if args.mode == INFEASIBLE and args.rho is None:
        raise InputError("--rho is required in infeasible mode")
    opts = dict(
        mode=args.mode, density=args.density, rho_target=args.rho_target,
        cg_max=args.cg_max, preconditioner=args.preconditioner, sigma=args.sigma,
        gamma=args.gamma, eta=args.eta, nu=args.nu, eps=args.eps,
        rho=args.rho if args.rho is not None else 1e4, max_outer=args.max_outer,
        no_timing=args.no_timing,
    )
    for m, n in args.sizes:
        if not 1 <= m < n:
            raise InputError(f"size {m}x{n}: need 1 <= m < n")
        SolveParams(nu=args.nu, kappa=0.0).validate(args.mode, n) if args.nu is not None else None
    return [
        (size, kappa, cond, seed, opts)
        for size in args.sizes
        for kappa in args.kappas
        for cond in conditions
        for seed in args.seeds
    ]


def cmd_experiment(args):
    try:
        cells = experiment_cells(args)
    except (InputError, ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_experiment_cell, cells))
    else:
        rows = [_experiment_cell(c) for c in cells]
    os.makedirs(args.out, exist_ok=True)
    _write_csv(os.path.join(args.out, "summary.csv"), SUMMARY_COLUMNS, [r[0] for r in rows])
    _write_csv(os.path.join(args.out, "detail.csv"), DETAIL_COLUMNS, [r[1] for r in rows])
    print(f"{len(rows)} runs written to {os.path.join(args.out, 'summary.csv')}")
    return 0


def cmd_validate(args):
    tallies = run_suites(seeds=args.seeds, suites=args.suite, samples=args.samples,
                         break_lift=args.break_lift)
    failed = False
    for name, t in tallies.items():
        verdict = "PASS" if t.failed == 0 and t.passed > 0 else "FAIL"
        failed |= verdict == "FAIL"
        extra = f" skipped={t.skipped}" if t.skipped else ""
        print(f"{verdict} {name}: passed={t.passed} failed={t.failed}{extra} worst={t.worst:.3e}")
        for note in t.notes:
            print(f"    {note}")
    return EXIT_PROPERTY_FAILED if failed else 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2, which is taken
        return EXIT_INPUT_ERROR if exc.code not in (0, None) else 0
    handler = {"solve": cmd_solve, "experiment": cmd_experiment, "validate": cmd_validate}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
