"""Command-line front end.  Reports are JSON on stdout, diagnostics on stderr.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Any

from .combinatorics import certify_very_sparse
from .convergence import (
    DEFAULT_LADDER,
    SequenceWindow,
    find_limit_witness,
    nu2_valuation_failures,
    nu2_sequence,
)
from .errors import IdealLabError
from .partition_regular import PartitionRegularMap
from .realization import RealizationKind, build_realized_sequence
from .souslin import parse_scheme, validate
from .suites import SUITES

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("IDEAL_LAB_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise UsageError(f"IDEAL_LAB_THREADS must be an integer, got {env!r}") from None


def _write_json(path: str, data: Any) -> None:
    Path(path).write_text(json.dumps(data, sort_keys=True) + "\n")


def _load_sequence(path: str) -> SequenceWindow:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "values" not in data or "bound" not in data:
        raise UsageError(f"{path} is not a sequence file")
    if "domain" not in data and "kind" in data:
        # realized-sequence files name their kind instead of their domain
        data = dict(data, domain="pair" if data["kind"] == RealizationKind.RAMSEY.value else "nat")
    try:
        return SequenceWindow.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed sequence file {path}: {exc}") from None


# --------------------------------------------------------------------------- commands


def cmd_construct(args) -> tuple[dict, int]:
    scheme = parse_scheme(args.scheme)
    check = validate(scheme, min(args.depth, 6), width=2)
    if not check.ok:
        raise UsageError(f"scheme {args.scheme} fails validation: {check.violation}")
    realized = build_realized_sequence(args.kind, scheme, args.depth, args.bound, threads=_threads(args))
    data = realized.to_json()
    if args.out:
        _write_json(args.out, data)
    values = realized.window.values
    results = {
        "kind": realized.kind.value,
        "scheme": scheme.name,
        "bound": realized.window.bound,
        "indices": len(values),
        "resolution_depth": realized.resolution_depth,
        "resolution_error": realized.resolution_error,
        "value_range": [float(values.min()), float(values.max())],
    }
    if realized.D is not None:
        results["D"] = list(realized.D.elements)
    if not args.out:
        results["sequence"] = data
    return results, EXIT_OK


def cmd_check_limit(args) -> tuple[dict, int]:
    x = _load_sequence(args.seq)
    rho = PartitionRegularMap.parse(args.rho)
    if rho.target_domain is not x.domain:
        raise UsageError(f"--rho {args.rho} needs a {rho.target_domain.value}-indexed sequence, got {x.domain.value}")
    w = find_limit_witness(
        rho, x, args.eta, args.eps_ladder, lag=args.max_K, step=args.step,
        search_bound=args.max_F, max_nodes=args.max_nodes,
    )
    if w:
        return {"found": True, "witness": w.to_json(x)}, EXIT_OK
    return w.to_json(), EXIT_OK


def cmd_example(args) -> tuple[dict, int]:
    if args.bound < 2:
        raise UsageError("--bound must be at least 2")
    x = nu2_sequence(args.bound)
    if args.out:
        _write_json(args.out, x.to_json())
    valuations = nu2_valuation_failures(min(args.bound, 4096))
    limit = find_limit_witness(PartitionRegularMap.parse("fs"), x, 0.0, DEFAULT_LADDER, lag=2)
    third = find_limit_witness(PartitionRegularMap.parse("fs"), x, 1 / 3, DEFAULT_LADDER)
    results = {
        "bound": args.bound,
        "valuations": valuations,
        "limit_eta_0": limit.to_json(x) if limit else limit.to_json(),
        "limit_eta_third": third.to_json(x) if third else third.to_json(),
    }
    failed = valuations["failures_A"] or valuations["failures_B"]
    return results, EXIT_FAIL if failed else EXIT_OK


def cmd_certify_sparse(args) -> tuple[dict, int]:
    if args.size < 1:
        raise UsageError("--size must be at least 1")
    elements = [1]
    while len(elements) < args.size:
        elements.append(args.growth * sum(elements) + 1)
    report = certify_very_sparse(elements)
    out = report.to_json()
    if report.passed:
        out["certified_bound"] = sum(elements) + 1
    return out, EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> tuple[dict, int]:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    result = SUITES[args.suite](args.depth, threads=_threads(args))
    return result, EXIT_OK if result["passed"] else EXIT_FAIL


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS lets the shared options appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (env IDEAL_LAB_THREADS)")
    common.add_argument("--stable", action="store_true", default=argparse.SUPPRESS,
                        help="omit timing so output is byte-comparable")
    common.add_argument("--report", metavar="FILE", default=argparse.SUPPRESS, help="also write the report to FILE")

    parser = argparse.ArgumentParser(prog="ideal-lab", description=__doc__.splitlines()[0], parents=[common])
    parser.set_defaults(threads=None, stable=False, report=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a realized sequence")
    p.add_argument("--kind", choices=[k.value for k in RealizationKind], required=True)
    p.add_argument("--scheme", required=True, help="singleton:c | finite:a,b | cantor | rationals[:w] | FILE")
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--depth", type=int, default=12, help="resolution depth of branch points")
    p.add_argument("--out", help="write the sequence JSON here")
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("check-limit", parents=[common], help="search a limit witness")
    p.add_argument("--seq", required=True)
    p.add_argument("--rho", choices=["fs", "pairs", "ident"], required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps-ladder", type=float, nargs="+", default=list(DEFAULT_LADDER))
    p.add_argument("--max-F", type=int, default=None, help="generators are drawn below this bound")
    p.add_argument("--max-K", type=int, default=0, help="generators the first rung may drop")
    p.add_argument("--step", type=int, default=1, help="extra generators each further rung may drop")
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.set_defaults(run=cmd_check_limit)

    p = sub.add_parser("example", parents=[common], help="built-in example sequences")
    p.add_argument("name", choices=["nu2"])
    p.add_argument("--bound", type=int, default=1 << 16)
    p.add_argument("--out", help="write the sequence JSON here")
    p.set_defaults(run=cmd_example)

    p = sub.add_parser("certify-sparse", parents=[common], help="generate and certify a very sparse set")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--growth", type=int, default=4)
    p.set_defaults(run=cmd_certify_sparse)

    p = sub.add_parser("verify", parents=[common], help="run a verification battery")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--depth", type=int, default=4)
    p.set_defaults(run=cmd_verify)
    return parser


def _params(args) -> dict[str, Any]:
    skip = {"run", "command", "stable", "report", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        results, code = args.run(args)
    except (UsageError, IdealLabError, ValueError) as exc:
        print(f"ideal-lab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ideal-lab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {
        "command": args.command,
        "parameters": _params(args),
        "results": results,
        "passed": code == EXIT_OK,
    }
    if not args.stable:
        report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
