"""Command-line harness.

Subcommands: analyze, heights, verify, bounds, torus-check.
Exit codes: 0 all checks passed, 1 at least one check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bounds import (
    BoundInputs,
    lang_constant,
    small_height_threshold,
    torsion_bound,
    verify_hindry_torus,
)
from .exactnum import UnfactoredPart
from .harness import (
    ALL_CHECKS,
    OffCurvePoint,
    ParseError,
    RunConfig,
    analyze_rows,
    emit_report,
    heights_rows,
    parse_curve_file,
    run_suite,
    summarize,
)
from .heights import HeightConfig


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--tol", type=float, default=1e-9, help="comparison slack")
    sub.add_argument("--factor-bound", type=int, default=10**5)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--checks", type=str, default="", help="comma-separated subset")
    sub.add_argument("--parallel", type=int, default=1)
    sub.add_argument("--format", choices=("json", "tsv"), default="json")
    sub.add_argument("--out", type=str, default="")


def _config(args: argparse.Namespace) -> RunConfig:
    checks = ALL_CHECKS
    if args.checks:
        wanted = tuple(c.strip() for c in args.checks.split(",") if c.strip())
        unknown = [c for c in wanted if c not in ALL_CHECKS]
        if unknown:
            raise ParseError(0, f"unknown checks: {', '.join(unknown)}")
        checks = wanted
    return RunConfig(
        tolerance=args.tol,
        factor_bound=args.factor_bound,
        seed=args.seed,
        checks=checks,
        parallelism=args.parallel,
        output_format=args.format,
    )


def _write(text: str, out: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json_rows(rows: list[dict], fmt: str, out: str) -> None:
    if fmt == "tsv":
        lines = []
        for r in rows:
            lines.append("\t".join(f"{k}={json.dumps(v, sort_keys=True)}" for k, v in r.items()))
        _write("\n".join(lines) + "\n", out)
    else:
        _write("\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n", out)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ellheights",
        description="Local/global heights, reduction data, and bound verification "
        "for elliptic curves over Q",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_analyze = subs.add_parser("analyze", help="local reduction data and Szpiro ratio")
    p_analyze.add_argument("file")
    _add_common(p_analyze)

    p_heights = subs.add_parser("heights", help="canonical heights with local breakdown")
    p_heights.add_argument("file")
    _add_common(p_heights)

    p_verify = subs.add_parser("verify", help="run the inequality suite")
    p_verify.add_argument("file")
    _add_common(p_verify)

    p_bounds = subs.add_parser("bounds", help="pure bound calculators")
    p_bounds.add_argument("--d", type=int, default=1)
    p_bounds.add_argument("--sigma", type=float, default=1.0)
    p_bounds.add_argument("--log-norm-delta", type=float, default=0.0)
    p_bounds.add_argument("--format", choices=("json", "tsv"), default="json")
    p_bounds.add_argument("--out", type=str, default="")

    p_torus = subs.add_parser("torus-check", help="torus Neron-function floor check")
    p_torus.add_argument("--tau", type=str, required=True, help="RE,IM")
    p_torus.add_argument("--samples", type=int, default=10000)
    p_torus.add_argument("--seed", type=int, default=0)
    p_torus.add_argument("--tol", type=float, default=1e-9)
    p_torus.add_argument("--format", choices=("json", "tsv"), default="json")
    p_torus.add_argument("--out", type=str, default="")

    args = parser.parse_args(argv)

    try:
        if args.command == "bounds":
            inputs = BoundInputs(args.d, args.sigma, args.log_norm_delta)
            row = {
                "d": args.d,
                "sigma": args.sigma,
                "log_norm_discriminant": args.log_norm_delta,
                "torsion_bound": torsion_bound(inputs),
                "lang_constant": lang_constant(inputs),
                "small_height_threshold": small_height_threshold(inputs),
            }
            _emit_json_rows([row], args.format, args.out)
            return 0

        if args.command == "torus-check":
            re_s, _, im_s = args.tau.partition(",")
            try:
                tau = complex(float(re_s), float(im_s))
            except ValueError:
                raise ParseError(0, f"bad --tau {args.tau!r}") from None
            report = verify_hindry_torus(
                tau, args.samples, args.seed, HeightConfig(), args.tol
            )
            row = {
                "check": report.check_name,
                "tau": [tau.real, tau.imag],
                "samples": args.samples,
                "seed": args.seed,
                "lhs": report.lhs,
                "rhs": report.rhs,
                "margin": report.margin,
                "status": report.status,
            }
            _emit_json_rows([row], args.format, args.out)
            return 0 if report.status == "pass" else 1

        config = _config(args)
        records = parse_curve_file(args.file)
        if args.command == "analyze":
            _emit_json_rows(analyze_rows(records, config), args.format, args.out)
            return 0
        if args.command == "heights":
            _emit_json_rows(heights_rows(records, config), args.format, args.out)
            return 0
        if args.command == "verify":
            rows = run_suite(records, config)
            _write(emit_report(rows, config), args.out)
            return 1 if summarize(rows)["summary"]["fail"] else 0
    except (ParseError, OffCurvePoint, UnfactoredPart, OSError, ValueError) as exc:
        print(f"ellheights: input error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
