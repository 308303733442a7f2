"""Command-line campaign runner, report emitter, and reproduction harness.

Subcommands:
  check <names...>   run verification campaigns over named checks
  falsify <name>     search for a counterexample to one check
  scalar-scan        scan the scalar chain over a ratio range
  replay <trace>     re-run a recorded instance from its seed trace
  list               show the check registry
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

from . import campaign
from .campaign import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, CampaignConfig
from .checks import CHECKS, SampleSpace, UnknownCheck, falsify, get_check
from .hypgen import InfeasibleHypothesis
from .scalar_means import REL_SLACK_TOL, chain_scan


def _parse_range(text: str) -> tuple[float, float]:
    """Parse "a" (a point) or "a:b" (a uniform range)."""
    parts = text.split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v)
    if len(parts) == 2:
        lo, hi = float(parts[0]), float(parts[1])
        if hi < lo:
            raise argparse.ArgumentTypeError(f"range {text!r} has hi < lo")
        return (lo, hi)
    raise argparse.ArgumentTypeError(f"expected NUM or LO:HI, got {text!r}")


def _parse_dims(text: str) -> tuple[int, ...]:
    dims = tuple(int(t) for t in text.split(",") if t.strip())
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"invalid dimension list {text!r}")
    return dims


def _add_campaign_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=_parse_dims, default=(2, 5, 10),
                   help="comma-separated instance dimensions (default 2,5,10)")
    p.add_argument("--trials", type=int, default=100,
                   help="instances per check (default 100)")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    p.add_argument("--tol", type=float, default=None,
                   help="override the per-check relative margin tolerance")
    p.add_argument("--m", type=_parse_range, default=None, metavar="LO:HI",
                   help="range for the lower constant m")
    p.add_argument("--m-prime", type=_parse_range, default=None, metavar="LO:HI",
                   help="range for the refinement constant m'")
    p.add_argument("--M", dest="big_m", type=_parse_range, default=None, metavar="LO:HI",
                   help="range for the upper constant M")
    p.add_argument("--map", action="append", default=None, metavar="DESC",
                   help="map descriptor (repeatable): pinching[:1,2|3], "
                        "compression[:k=K], mixture[:j=J], identity")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=Path, default=None, help="report file path")
    p.add_argument("--strict", action="store_true",
                   help="documented-discrepancy violations also fail the run")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp for byte-reproducible reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opineq",
        description="verify and falsify refined AM-GM / Kantorovich operator inequalities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run verification campaigns")
    p_check.add_argument("names", nargs="+",
                         help=f"check names or 'all' ({', '.join(CHECKS)})")
    _add_campaign_flags(p_check)

    p_fals = sub.add_parser("falsify", help="search for a counterexample")
    p_fals.add_argument("name", help="check to attack")
    _add_campaign_flags(p_fals)

    p_scan = sub.add_parser("scalar-scan", help="scan the scalar chain")
    p_scan.add_argument("--lo", type=float, default=1e-8)
    p_scan.add_argument("--hi", type=float, default=1e8)
    p_scan.add_argument("--samples", type=int, default=10**6)
    p_scan.add_argument("--mode", choices=("grid", "log-grid", "adaptive"),
                        default="log-grid")
    p_scan.add_argument("--tol", type=float, default=REL_SLACK_TOL)
    p_scan.add_argument("--format", choices=("json", "csv"), default="json")
    p_scan.add_argument("--out", type=Path, default=None)
    p_scan.add_argument("--no-timestamp", action="store_true")

    p_replay = sub.add_parser("replay", help="re-run a recorded seed trace")
    p_replay.add_argument("trace",
                          help="path to a trace JSON file, or an inline JSON object")
    p_replay.add_argument("--tol", type=float, default=None)
    p_replay.add_argument("--out", type=Path, default=None)

    sub.add_parser("list", help="list the check registry")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _timestamp(no_timestamp: bool) -> str | None:
    if no_timestamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _resolve_names(names) -> tuple[str, ...]:
    if list(names) == ["all"]:
        return tuple(CHECKS)
    for n in names:
        get_check(n)
    return tuple(names)


def _config_from(args, names) -> CampaignConfig:
    return CampaignConfig(
        checks=names,
        trials=args.trials,
        seed=args.seed,
        dims=args.dim,
        tol=args.tol,
        m=args.m,
        m_prime=args.m_prime,
        big_m=args.big_m,
        maps=tuple(args.map) if args.map else None,
        strict=args.strict,
        no_timestamp=args.no_timestamp,
    )


def _cmd_check(args) -> int:
    try:
        names = _resolve_names(args.names)
    except UnknownCheck as exc:
        print(f"error: unknown check {exc.args[0]!r} (see 'opineq list')", file=sys.stderr)
        return EXIT_USAGE
    result = campaign.run(_config_from(args, names))
    if args.format == "csv":
        _emit(result.to_csv(), args.out)
    else:
        _emit(result.to_json(timestamp=_timestamp(args.no_timestamp)), args.out)
    for name, s in sorted(result.summaries.items()):
        status = "INFEASIBLE" if s.infeasible else (
            f"{s.violations} violation(s)" if s.violations else "ok")
        print(f"{name}: {s.evaluated}/{s.trials} evaluated, {status}", file=sys.stderr)
    return result.exit_code


def _cmd_falsify(args) -> int:
    try:
        check = get_check(args.name)
    except UnknownCheck:
        print(f"error: unknown check {args.name!r} (see 'opineq list')", file=sys.stderr)
        return EXIT_USAGE
    space_cfg = _config_from(args, (check.name,))
    try:
        result = falsify(check.name, args.trials, space_cfg.space(),
                         seed=args.seed, tol=args.tol)
    except InfeasibleHypothesis as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    doc = {
        "check": check.name,
        "found": result.found,
        "trials": result.trials,
        "trace": result.trace,
        "report": None if result.report is None else {
            "margin": result.report.margin,
            "relative_margin": result.report.relative_margin,
            "aux": result.report.aux,
        },
    }
    ts = _timestamp(args.no_timestamp)
    if ts is not None:
        doc["timestamp"] = ts
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    if result.found:
        print(f"counterexample found after {result.trials} trial(s)", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"exhausted {result.trials} trial(s) without a violation", file=sys.stderr)
    return EXIT_OK


def _cmd_scalar_scan(args) -> int:
    try:
        report = chain_scan(args.lo, args.hi, args.samples, args.mode)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = {
        "lo": report.lo,
        "hi": report.hi,
        "samples": report.samples,
        "mode": report.mode,
        "pair_slacks": [
            {"pair": f"{p.lhs}<={p.rhs}", "min_relative_slack": p.min_relative_slack,
             "argmin_x": p.argmin_x}
            for p in report.pair_slacks
        ],
        "bridge_min_slack": report.bridge_min_slack,
        "upper_identity_max_rel_diff": report.upper_identity_max_rel_diff,
        "worst_relative_slack": report.worst_relative_slack,
        "worst_pair": report.worst_pair,
        "tol": args.tol,
    }
    ts = _timestamp(args.no_timestamp)
    if ts is not None:
        doc["timestamp"] = ts
    if args.format == "csv":
        lines = ["pair,min_relative_slack,argmin_x"]
        for p in report.pair_slacks:
            lines.append(f"{p.lhs}<={p.rhs},{p.min_relative_slack!r},{p.argmin_x!r}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    ok = report.worst_relative_slack >= -args.tol and report.bridge_min_slack >= -args.tol
    print(f"worst slack {report.worst_relative_slack:.3e} at pair {report.worst_pair}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_replay(args) -> int:
    text = args.trace
    if not text.lstrip().startswith("{"):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            print(f"error: cannot read trace: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        trace = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: malformed trace JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(trace, dict) and "trace" in trace and "check" not in trace:
        trace = trace["trace"]  # accept a falsify report as-is
    try:
        report = campaign.replay(trace, tol=args.tol)
    except (UnknownCheck, ValueError, KeyError) as exc:
        print(f"error: malformed trace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = {
        "check": report.check_name,
        "trace": report.instance_ref,
        "hypothesis_ok": report.hypothesis_ok,
        "margin": report.margin,
        "relative_margin": report.relative_margin,
        "violated": report.violated,
        "aux": report.aux,
    }
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    if report.violated and (args.tol is not None or not get_check(report.check_name).expected_to_fail):
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_list(_args) -> int:
    width = max(len(n) for n in CHECKS)
    for name, check in CHECKS.items():
        tag = "  [documented-discrepancy]" if check.expected_to_fail else ""
        print(f"{name:<{width}}  {check.description}{tag}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "check": _cmd_check,
        "falsify": _cmd_falsify,
        "scalar-scan": _cmd_scalar_scan,
        "replay": _cmd_replay,
        "list": _cmd_list,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
