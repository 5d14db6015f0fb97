"""``qdil`` command line: norms, sweeps, certificates, enclosures, obstructions.

Every command prints one JSON document on stdout with a ``metadata`` block
(library version, tolerances, solver statistics, echoed arguments).  Exit
codes: 0 success or certified, 1 checked and failed, 2 usage error,
3 numerical or convergence error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .angles import RationalAngle
from .approx import enclose_constant, enclose_norm, parse_target
from .dilation import build_dilation, lower_bound_margin, verify_certificate
from .errors import CapacityError, ConvergenceError, DomainError, QDilationError, SizeError
from .mathieu import NORM_TOL, butterfly, butterfly_csv, butterfly_json, norm_details
from .rotrep import standard_pair

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


def _angle(text: str) -> RationalAngle:
    try:
        return RationalAngle.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _metadata(args, **extra) -> dict:
    config_echo = {k: (str(v) if isinstance(v, (RationalAngle, Path)) else v) for k, v in vars(args).items() if k != "func"}
    return {"version": __version__, "command": args.command, "config": config_echo, **extra}


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_norm(args) -> int:
    nd = norm_details(args.angle, args.tol)
    _emit(
        {
            "angle": str(args.angle),
            "theta": args.angle.theta,
            "norm": nd.norm,
            "c": nd.constant,
            "metadata": _metadata(
                args,
                tolerances={"norm": nd.tolerance},
                solver={"method": nd.method, "iterations": nd.iterations, "residual": nd.residual},
            ),
        }
    )
    return EXIT_OK


def cmd_butterfly(args) -> int:
    records = butterfly(args.max_denominator, workers=args.workers, phase_grid=args.phase_grid)
    text = butterfly_csv(records) if args.format == "csv" else butterfly_json(records)
    summary = {
        "rows": len(records),
        "angles": len({r.angle for r in records}),
        "max_c": max(r.constant for r in records),
        "min_norm": min(r.norm for r in records),
    }
    if args.out is None:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps({"summary": summary, "metadata": _metadata(args)}) + "\n")
        return EXIT_OK
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        sys.stderr.write(f"error: cannot write {args.out}: {exc}\n")
        return EXIT_FAILED
    _emit({"out": str(args.out), "summary": summary, "metadata": _metadata(args, tolerances={"norm": NORM_TOL})})
    return EXIT_OK


def cmd_dilate(args) -> int:
    pair = standard_pair(args.source)
    cert = build_dilation(pair, args.target, force_symmetrize=args.force_symmetrize)
    doc = {
        "from": str(args.source),
        "to": str(args.target),
        "gamma": str(cert.gamma),
        "c": cert.scale,
        "dimension": cert.dim,
        "symmetrized": cert.symmetrized,
    }
    status = EXIT_OK
    if args.verify:
        report = verify_certificate(cert)
        doc["verification"] = report.to_json()
        status = EXIT_OK if report.passed else EXIT_FAILED
    if args.out is not None:
        try:
            Path(args.out).write_text(cert.dumps() + "\n", encoding="utf-8")
        except OSError as exc:
            sys.stderr.write(f"error: cannot write {args.out}: {exc}\n")
            return EXIT_FAILED
        doc["certificate"] = str(args.out)
    doc["metadata"] = _metadata(args, tolerances={"residual_per_dimension": 1e-10})
    _emit(doc)
    return status


def cmd_enclose(args) -> int:
    target = parse_target(args.target)
    deadline = None if args.timeout is None else time.monotonic() + args.timeout
    func = enclose_constant if args.quantity == "constant" else enclose_norm
    enc = func(target, args.tol, max_denominator=args.max_denominator, deadline=deadline)
    doc = {"target": str(target), "quantity": args.quantity, **enc.to_json()}
    doc["metadata"] = _metadata(
        args,
        tolerances={"requested": args.tol, "solver": enc.solver.tolerance, "lipschitz_term": enc.lipschitz_term},
        solver={"method": enc.solver.method, "iterations": enc.solver.iterations, "residual": enc.solver.residual},
    )
    _emit(doc)
    return EXIT_OK


def cmd_obstruct(args) -> int:
    report = lower_bound_margin(args.angle, args.r, args.lam, args.grid)
    doc = report.to_json()
    doc["metadata"] = _metadata(args)
    _emit(doc)
    return EXIT_OK if report.certified else EXIT_FAILED


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    _emit({"checks": results, "passed": all(r["passed"] for r in results), "metadata": _metadata(args)})
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdil", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="||h_theta|| and c_theta at a rational angle")
    p.add_argument("--angle", type=_angle, required=True, help="exact fraction p/n of a full turn")
    p.add_argument("--tol", type=_positive_float, default=NORM_TOL)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("butterfly", help="band data for all p/n with n <= max")
    p.add_argument("--max-denominator", "--max", dest="max_denominator", type=_positive_int, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=_positive_int, default=None, help="default: $QDIL_WORKERS or 1")
    p.add_argument("--phase-grid", type=_positive_int, default=None, help="cross-check band edges on a grid")
    p.set_defaults(func=cmd_butterfly)

    p = sub.add_parser("dilate", help="build a dilation certificate from the standard pair")
    p.add_argument("--from", dest="source", type=_angle, required=True)
    p.add_argument("--to", dest="target", type=_angle, required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--out", type=Path, default=None, help="write the certificate JSON here")
    p.add_argument("--force-symmetrize", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("enclose", help="rigorous enclosure at an irrational frequency")
    p.add_argument("--target", required=True, help="silver, golden or custom:<x>")
    p.add_argument("--tol", type=_positive_float, required=True)
    p.add_argument("--quantity", choices=("constant", "norm"), default="constant")
    p.add_argument("--max-denominator", type=_positive_int, default=10**6)
    p.add_argument("--timeout", type=_positive_float, default=None, help="seconds")
    p.set_defaults(func=cmd_enclose)

    p = sub.add_parser("obstruct", help="certify that no commuting dilation of norm r exists")
    p.add_argument("--angle", type=_angle, required=True)
    p.add_argument("--r", type=_positive_float, required=True)
    p.add_argument("--lambda", dest="lam", type=_positive_float, default=100.0)
    p.add_argument("--grid", type=_positive_int, default=256)
    p.set_defaults(func=cmd_obstruct)

    p = sub.add_parser("selftest", help="fast end-to-end checks of known values")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConvergenceError, CapacityError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except (DomainError, SizeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except QDilationError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        # malformed environment overrides
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
