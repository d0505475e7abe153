"""Command line: build, run, trace, verify, audit, calibrate.

Exit status is 0 on success, 1 when a verification fails and 2 for usage,
parse and I/O errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .construction import ConstructionParams, build_parity_spec, params_from_spec
from .errors import ConfigurationError, DocumentError, IndeterminateDecision
from .interpreter import run_transformer
from .io import dump_spec, load_spec, trace_document
from .scalar import get_backend
from .semantic import semantic_decide
from .verification import (
    CalibrationError,
    calibrate_temperature,
    exhaustive_verify,
    lemma2_audit,
    random_verify,
)


class UsageError(Exception):
    pass


def _bitstring(text):
    if not text or any(ch not in "01" for ch in text):
        raise argparse.ArgumentTypeError(f"input must be a non-empty string of 0s and 1s, got {text!r}")
    return text


def _alpha(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number, got {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _spec(path):
    if path is None:
        return build_parity_spec()
    try:
        return load_spec(path)
    except OSError as exc:
        raise UsageError(f"cannot read spec {path}: {exc.strerror}") from None


def cmd_build(args):
    spec = build_parity_spec(ConstructionParams(alpha=args.alpha))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            dump_spec(spec, fp)
    else:
        dump_spec(spec, sys.stdout)
    return 0


def cmd_run(args):
    spec = _spec(args.spec)
    backend = get_backend(args.precision)
    result = run_transformer(spec, args.input, backend)
    print(f"{result.decision.value} {result.margin}")
    if args.trace:
        _, sem = semantic_decide(args.input, params_from_spec(spec), backend)
        with open(args.trace, "w", encoding="utf-8") as fp:
            json.dump(trace_document(args.input, result, sem), fp, indent=1)
            fp.write("\n")
    return 0


def cmd_trace(args):
    spec = _spec(args.spec)
    backend = get_backend(args.precision)
    result = run_transformer(spec, args.input, backend)
    _, sem = semantic_decide(args.input, params_from_spec(spec), backend)
    json.dump(trace_document(args.input, result, sem), sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


def cmd_verify(args):
    spec = _spec(args.spec)
    reports = [exhaustive_verify(spec, args.max_n, workers=args.workers)]
    if args.random:
        reports.append(random_verify(spec, args.random, args.len, seed=args.seed))
    for rep in reports:
        print(rep.as_text(include_runtime=False))
    return 0 if all(r.passed for r in reports) else 1


def cmd_audit(args):
    rep = lemma2_audit(args.max_n, ConstructionParams(alpha=args.alpha))
    print(rep.as_text(include_runtime=False))
    for fam, info in rep.details["min_ratio"].items():
        print(f"  min |b|/|{fam}| = {info['value']!r} at (n, sigma, i) = {tuple(info['at'])}"
              f"  floor {rep.details['floors'][fam]!r}")
    return 0 if rep.passed else 1


def cmd_calibrate(args):
    params = ConstructionParams(alpha=args.alpha)
    try:
        found = calibrate_temperature(args.n, args.target, params)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}")
        return 1
    schedule = params.temperature(args.n)
    ok = found <= schedule
    print(f"n={args.n} target={args.target!r} minimal_T={found!r} schedule_T={schedule} "
          f"{'sufficient' if ok else 'INSUFFICIENT'}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="parityformer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write the parity transformer spec as JSON")
    p.add_argument("--alpha", type=_alpha, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    for name, func, helptext in (("run", cmd_run, "classify one input"),
                                 ("trace", cmd_trace, "emit the full trace document")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--spec", help="spec JSON (default: built-in construction)")
        p.add_argument("--input", required=True, type=_bitstring)
        p.add_argument("--precision", type=_positive, default=None,
                       help="mantissa bits; omit or 53 for float64")
        if name == "run":
            p.add_argument("--trace", help="also write a trace document here")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="check decisions against the parity oracle")
    p.add_argument("--spec")
    p.add_argument("--max-n", type=_positive, required=True)
    p.add_argument("--random", type=_positive, default=0, metavar="COUNT")
    p.add_argument("--len", type=_positive, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit", help="audit the coefficient argmax inequalities")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--alpha", type=_alpha, default=0.01)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("calibrate", help="search the minimal temperature for a margin")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--target", type=float, default=1 / 3)
    p.add_argument("--alpha", type=_alpha, default=0.01)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "audit" and args.max_n < 2:
        parser.error("--max-n must be at least 2 for audit")
    if args.command == "calibrate" and not 0 < args.target < 1:
        parser.error("--target must lie in (0, 1)")
    try:
        return args.func(args)
    except (UsageError, DocumentError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2
    except IndeterminateDecision as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
