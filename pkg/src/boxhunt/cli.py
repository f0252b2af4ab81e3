"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 a verification or
tolerance failure.  ``BOXHUNT_SEED`` supplies the seed when ``--seed`` is
absent; ``BOXHUNT_OUT`` names a directory that receives
``<command>.<format>`` when ``--out`` is absent.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import bounds, continuous, verify
from .core import Placement, ProblemInstance, StrategyId, UNIFORM, build_schedule, validate_instance
from .exact import (
    MatrixOverflowError,
    build_matrix,
    column_requirement_check,
    theta,
)
from .montecarlo import SimConfig, crash_experiment, estimate_theta
from .serialize import (
    CSV_FIELDS,
    dumps,
    report_csv_row,
    report_record,
    write_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_RANGE = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*(?::\s*(\d+)\s*)?)?$")


def parse_range(text: str, least: int = 1) -> list[int]:
    """``lo..hi[:step]`` (inclusive) or a single integer."""
    match = _RANGE.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected lo..hi[:step]")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) else lo
    step = int(match.group(3)) if match.group(3) else 1
    if step < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"range {text!r} must be ascending with step ≥ 1")
    if lo < least:
        raise argparse.ArgumentTypeError(f"range {text!r} must start at ≥ {least}")
    return list(range(lo, hi + 1, step))


def _positive_range(text):
    return parse_range(text, 1)


def _strategy(text):
    try:
        return StrategyId.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _crash(text):
    match = re.match(r"^\s*(\d+)\s*@\s*(\d+)\s*$", text)
    if not match:
        raise argparse.ArgumentTypeError(f"bad crash {text!r}; expected SEARCHER@STEP")
    return int(match.group(1)), int(match.group(2))


def _placement(text):
    if text == "uniform":
        return UNIFORM
    try:
        return Placement.fixed(int(text))
    except ValueError:
        raise argparse.ArgumentTypeError("placement must be 'uniform' or a box index")


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boxhunt", description="Non-coordinating treasure-hunt search: bounds, exact analysis, simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="closed-form speed-up limits per k")
    p.add_argument("--k", type=_positive_range, required=True)
    _add_output(p)

    p = sub.add_parser("exact", help="exact theta and speed-ups from the non-visit matrix")
    p.add_argument("--alg", type=_strategy, required=True)
    p.add_argument("--k", type=_positive_range, required=True)
    p.add_argument("--m", type=_positive_range, required=True)
    p.add_argument("--mode", choices=("auto", "rational", "float64"), default="auto")
    p.add_argument("--placement", type=_placement, default=UNIFORM)
    p.add_argument("--per-x", action="store_true")
    p.add_argument("--check-columns", action="store_true")
    p.add_argument("--rational-limit", type=int, default=None)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of theta")
    p.add_argument("--alg", type=_strategy, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--placement", type=_placement, default=UNIFORM)
    p.add_argument("--crash", type=_crash, action="append", default=[], metavar="SEARCHER@STEP")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--per-x", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)

    p = sub.add_parser("opt", help="theta of the optimal continuous profile, closed form and quadrature")
    p.add_argument("--k", type=lambda s: parse_range(s, 2), required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    _add_output(p)

    p = sub.add_parser("verify", help="run property suites and print a pass/fail table")
    p.add_argument("--suite", choices=sorted(verify.SUITES) + ["all"], default="all")
    p.add_argument("--alg", type=_strategy, action="append", default=None)
    p.add_argument("--k", type=_positive_range, default=None)
    p.add_argument("--m", type=int, default=60)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=None)
    _add_output(p)
    return parser


def _emit(text: str, args, command: str) -> None:
    out = args.out
    if out is None and os.environ.get("BOXHUNT_OUT"):
        out = str(Path(os.environ["BOXHUNT_OUT"]) / f"{command}.{args.format}")
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BOXHUNT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BOXHUNT_SEED must be an integer, got {env!r}")


def _single_or_list(items):
    return items[0] if len(items) == 1 else items


def cmd_bounds(args) -> int:
    rows = []
    for k in args.k:
        u, a = bounds.uniform_bound(k), bounds.adversarial_bound(k)
        mem = bounds.memoryless_bound(k) if k >= 2 else None
        rows.append({
            "k": k,
            "uniform_bound": float(u),
            "uniform_exact": str(u.value),
            "adversarial_bound": float(a),
            "adversarial_exact": str(a.value),
            "memoryless_bound": float(mem) if mem else None,
            "memoryless_kind": mem.kind.value if mem else None,
            "gap_ratio": float(bounds.gap_ratio(k)),
        })
    if args.format == "json":
        text = dumps(_single_or_list(rows))
    else:
        header = list(rows[0])
        text = write_csv(header, ([r[h] for h in header] for r in rows))
    _emit(text, args, "bounds")
    return EXIT_OK


def cmd_exact(args) -> int:
    status = EXIT_OK
    records, csv_rows, detail_rows, notes = [], [], [], []
    for k in args.k:
        for m in args.m:
            instance = ProblemInstance(m, k, args.placement)
            problem = validate_instance(instance)
            if problem:
                raise UsageError(problem)
            schedule = build_schedule(args.alg, instance)
            kwargs = {} if args.rational_limit is None else {"rational_limit": args.rational_limit}
            matrix = build_matrix(schedule, mode=args.mode, **kwargs)
            report = theta(matrix, k, args.placement, per_x=args.per_x)
            extra = {"requested_m": m}
            if args.check_columns:
                violation = column_requirement_check(matrix)
                extra["column_check"] = "ok" if violation is None else f"violation at t={violation.t}"
                if violation is not None:
                    status = EXIT_FAIL
                    notes.append(f"column requirement violated: k={k} m={m} t={violation.t} C={violation.column_sum}")
            records.append(report_record(report, extra))
            csv_rows.append(report_csv_row(report))
            if report.per_x:
                detail_rows.extend((k, report.m, p.x, p.expected_time, p.theta_x) for p in report.per_x)
    if args.format == "json":
        text = dumps(_single_or_list(records))
    else:
        text = write_csv(CSV_FIELDS, csv_rows)
        if detail_rows:
            text += "\n" + write_csv(("k", "m", "x", "expected_time", "theta_x"), detail_rows)
    _emit(text, args, "exact")
    for note in notes:
        print(note, file=sys.stderr)
    return status


def cmd_simulate(args) -> int:
    seed = _seed(args)
    try:
        config = SimConfig(
            ProblemInstance(args.m, args.k, args.placement),
            args.alg,
            args.trials,
            seed,
            crash_plan=tuple(args.crash),
            max_steps=args.max_steps,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    extra = {}
    if config.crash_plan:
        result = crash_experiment(config, workers=args.workers)
        report = result.report
        extra["found_fraction"] = result.found_fraction
        extra["crash_plan"] = [list(c) for c in config.crash_plan]
    else:
        report = estimate_theta(config, per_x=args.per_x, workers=args.workers)
    if args.format == "json":
        text = dumps(report_record(report, extra))
    else:
        text = write_csv(CSV_FIELDS, [report_csv_row(report)])
    _emit(text, args, "simulate")
    if not report.valid:
        print(f"{report.not_found} of {report.trials} trials never found the treasure", file=sys.stderr)
    if "found_fraction" in extra:
        print(f"found_fraction={extra['found_fraction']:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_opt(args) -> int:
    status = EXIT_OK
    rows = []
    for k in args.k:
        r1, r2, r3 = continuous.opt_regions(k)
        total = r1 + r2 + r3
        closed = Fraction(3 * k - 1, k * (k + 1))
        value, err = continuous.quadrature_theta(k)
        diff = abs(value - float(closed))
        ok = total == closed and diff <= args.tol and err <= args.tol
        if not ok:
            status = EXIT_FAIL
        rows.append({
            "k": k,
            "region_early_partial": float(r1),
            "region_early_full": float(r2),
            "region_late": float(r3),
            "sum": float(total),
            "sum_exact": str(total),
            "closed_form": str(closed),
            "quadrature": value,
            "quadrature_error": err,
            "abs_diff": diff,
            "pass": ok,
        })
    if args.format == "json":
        text = dumps(_single_or_list(rows))
    else:
        header = list(rows[0])
        text = write_csv(header, ([r[h] for h in header] for r in rows))
    _emit(text, args, "opt")
    return status


def cmd_verify(args) -> int:
    seed = _seed(args) if args.seed is not None or os.environ.get("BOXHUNT_SEED") else 3
    algs = args.alg
    suites = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
    checks = []
    for name in suites:
        if name == "columns":
            checks += verify.suite_columns(algs or list(StrategyId), args.k or [2, 3, 4], args.m)
        elif name == "monotonicity":
            checks += verify.suite_monotonicity(algs or list(StrategyId), args.k or [2, 3, 4], args.m)
        elif name == "single":
            checks += verify.suite_single_searcher(algs or list(StrategyId), args.k or [1, 2, 3], args.m)
        elif name == "zoom":
            checks += verify.suite_zoom()
        elif name == "gamma":
            checks += verify.suite_gamma(args.cases, seed)
        elif name == "mc":
            checks += verify.suite_mc(algs or list(StrategyId), args.k or [2, 3], args.m, args.trials, seed)
        elif name == "opt":
            checks += verify.suite_opt(args.k or range(2, 11))
    rows = [(c.suite, c.name, "pass" if c.passed else "FAIL", c.detail) for c in checks]
    if args.format == "json":
        text = dumps([dict(zip(("suite", "name", "result", "detail"), r)) for r in rows])
    else:
        text = write_csv(("suite", "name", "result", "detail"), rows)
    _emit(text, args, "verify")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "bounds": cmd_bounds,
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "opt": cmd_opt,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, MatrixOverflowError) as exc:
        print(f"boxhunt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"boxhunt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
