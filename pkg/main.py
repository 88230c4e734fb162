# main.py

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, TextIO

from pydantic import ValidationError

from euler_lagrange import unweighted_obstruction
from expression import ExpressionSyntaxError
from functionals import weighted_energy_problem
from models import CheckResult, SolverOptions, SweepRow
from power_calculus import FracOrder
from ritz_solver import DegeneracyError, solve_general, solve_quadratic, verify_minimizer
from spec_file import SpecFileError, format_number, read_spec_file, write_result
from special_fn import gamma
from suites import SUITES, run_suite

logger = logging.getLogger(__name__)

LOG_LEVEL = os.getenv("FRACVAR_LOG_LEVEL", "WARNING")
DEFAULT_M = 3
EXAMPLE1_TRIALS = 200
VALUE_TOL = 1e-8
SWEEP_COLUMNS = ("alpha", "value", "gamma_alpha_plus_1", "abs_error", "residual_max_deviation", "converged")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NONCONVERGED = 4


class UsageError(ValueError):
    pass


def _sweep_workers() -> int:
    raw = os.getenv("FRACVAR_SWEEP_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        logger.warning("Ignoring FRACVAR_SWEEP_WORKERS=%r, expected a positive integer", raw)
        return 1
    return value


def _check_alpha(alpha: float) -> float:
    try:
        return FracOrder(alpha=alpha).alpha
    except ValidationError as exc:
        raise UsageError(f"alpha must satisfy 0 < alpha <= 1, got {alpha!r}") from exc


def _parse_alphas(raw: str) -> List[float]:
    alphas = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            alphas.append(_check_alpha(float(item)))
        except ValueError as exc:
            raise UsageError(f"bad alpha {item!r} in --alphas: {exc}") from exc
    return alphas


def _print_checks(checks: Sequence[CheckResult], out: TextIO) -> None:
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        if not check.exercised:
            status = "SKIP"
        print(f"check {check.name}: {status} ({check.detail})", file=out)


def run_example1(alpha: float, m: int = DEFAULT_M, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    alpha = _check_alpha(alpha)
    if m < 0:
        raise UsageError(f"--m must be >= 0, got {m}")
    prob = weighted_energy_problem(alpha)
    res = solve_quadratic(prob, m)
    expected = gamma(alpha + 1.0)
    error = abs(res.value - expected)
    report = verify_minimizer(prob, res, trials=EXAMPLE1_TRIALS)
    path = res.trajectory.path
    terms = " + ".join(f"{c:.12g}*t^{e:.12g}" for c, e in path.terms) or "0"

    print(f"example1 alpha={format_number(alpha)} m={m}", file=out)
    print(f"coefficients: {', '.join(f'{c:.3e}' for c in res.coefficients) or '(none)'}", file=out)
    print(f"trajectory: y(t) = {terms}", file=out)
    print(f"value: {format_number(res.value)}", file=out)
    print(f"gamma(alpha+1): {format_number(expected)}", file=out)
    print(f"abs_error: {error:.3e}", file=out)
    residual = res.residual
    print(
        f"residual: k={residual.k_estimate:.12g} max_deviation={residual.max_deviation:.3e} "
        f"constant={'true' if residual.constant else 'false'}",
        file=out,
    )
    checks = [CheckResult(name="value_matches_gamma", passed=error <= VALUE_TOL, detail=f"abs_error={error:.3e}")]
    checks += report.checks
    _print_checks(checks, out)
    return EXIT_OK if all(check.passed for check in checks) else EXIT_INTERNAL


def run_example2(alpha: float, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    alpha = _check_alpha(alpha)
    report = unweighted_obstruction(alpha)
    print(f"example2 alpha={format_number(alpha)}", file=out)
    for step in report.derivation:
        print(f"  {step}", file=out)
    if report.has_solution:
        print(f"minimizer: {report.solution}, value {format_number(report.value)}", file=out)
    else:
        print("verdict: no minimizer in F (k = 0 forces a constant y)", file=out)
    print(
        f"agrawal candidate: D^alpha y({report.agrawal_t:g}) = (1-t)^(alpha-1) = "
        f"{format_number(report.agrawal_derivative)}",
        file=out,
    )
    print(f"agrawal candidate: y(0.5) = {format_number(report.agrawal_midpoint_value)}", file=out)
    if report.agrawal_endpoint_value is None:
        print("agrawal candidate: y(1) diverges", file=out)
    else:
        print(f"agrawal candidate: y(1) = {format_number(report.agrawal_endpoint_value)}", file=out)
    return EXIT_OK


def sweep_row(alpha: float, m: int) -> SweepRow:
    res = solve_quadratic(weighted_energy_problem(alpha), m)
    expected = gamma(alpha + 1.0)
    return SweepRow(
        alpha=alpha,
        value=res.value,
        gamma_alpha_plus_1=expected,
        abs_error=abs(res.value - expected),
        residual_max_deviation=res.residual.max_deviation,
        converged=res.converged,
    )


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return format_number(value)


def run_sweep(alphas: Sequence[float], m: int, out_path: str) -> int:
    alphas = [_check_alpha(alpha) for alpha in alphas]
    if m < 0:
        raise UsageError(f"--m must be >= 0, got {m}")
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        # map keeps input order whatever the completion order
        with ThreadPoolExecutor(max_workers=_sweep_workers()) as pool:
            rows = list(pool.map(lambda alpha: sweep_row(alpha, m), alphas))
        for row in rows:
            record = row.model_dump()
            writer.writerow([_csv_cell(record[column]) for column in SWEEP_COLUMNS])
    logger.info("Wrote %s sweep rows to %s", len(alphas), out_path)
    return EXIT_OK


def run_verify(suite: str, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    results = run_suite(suite)
    _print_checks(results, out)
    passed = all(check.passed for check in results)
    print(f"suite {suite}: {'PASS' if passed else 'FAIL'}", file=out)
    return EXIT_OK if passed else EXIT_INTERNAL


def run_solve(spec_path: str, out_path: str, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    spec, prob = read_spec_file(spec_path)
    opts = SolverOptions(quad_n=spec.quad_n, max_iter=spec.max_iter)
    try:
        if spec.solver == "quadratic":
            res = solve_quadratic(prob, spec.m, opts)
        else:
            res = solve_general(prob, spec.m, opts)
    except DegeneracyError as exc:
        print(f"solve failed: {exc}", file=out)
        return EXIT_NONCONVERGED
    write_result(out_path, spec, res)
    print(
        f"solved {prob.lagrangian.label} alpha={format_number(spec.alpha)} m={spec.m}: "
        f"value={format_number(res.value)} converged={'true' if res.converged else 'false'} -> {out_path}",
        file=out,
    )
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracvar", description="Fractional calculus of variations toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    example1 = commands.add_parser("example1", help="minimize the weighted v^2 functional with y(0)=0, y(1)=1")
    example1.add_argument("--alpha", type=float, required=True)
    example1.add_argument("--m", type=int, default=DEFAULT_M)
    example1.set_defaults(handler=lambda args: run_example1(args.alpha, args.m))

    example2 = commands.add_parser("example2", help="show the unweighted problem has no minimizer for alpha < 1")
    example2.add_argument("--alpha", type=float, required=True)
    example2.set_defaults(handler=lambda args: run_example2(args.alpha))

    sweep = commands.add_parser("sweep", help="tabulate example1 over several alphas as CSV")
    sweep.add_argument("--alphas", required=True, help="comma-separated list, e.g. 0.25,0.5,0.75,1")
    sweep.add_argument("--m", type=int, default=DEFAULT_M)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(handler=lambda args: run_sweep(_parse_alphas(args.alphas), args.m, args.out))

    verify = commands.add_parser("verify", help="run a property suite")
    verify.add_argument("--suite", required=True, choices=sorted(SUITES))
    verify.set_defaults(handler=lambda args: run_verify(args.suite))

    solve = commands.add_parser("solve", help="solve the problem described by a spec file")
    solve.add_argument("--spec", required=True)
    solve.add_argument("--out", required=True)
    solve.set_defaults(handler=lambda args: run_solve(args.spec, args.out))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except (UsageError, SpecFileError, ExpressionSyntaxError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:
        logger.exception("Unexpected failure in %s", args.command)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
