"""Command line entry point.

Exit codes: 0 success, 1 invalid input or usage, 2 a check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import estimate_event_frequencies
from .benchmarks import benchmark_summary
from .core import BidProfile
from .harness.audit import audit_truthfulness
from .harness.experiment import ExperimentConfig, atomic_write, default_workers, run_experiment, write_report
from .harness.generators import FAMILIES, InstanceGenerator, generate_instance
from .mechanisms import MechanismDescriptor, run_auction

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_grid(text: str) -> list[int]:
    """``0:16`` (inclusive range) or ``0,2,5``."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_param(text: str):
    key, sep, raw = text.partition("=")
    if not sep:
        raise ValueError(f"parameter {text!r} is not key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def cmd_benchmark(args) -> int:
    _emit(benchmark_summary(BidProfile.load(args.bids)))
    return EXIT_OK


def cmd_run(args) -> int:
    mech = MechanismDescriptor.parse(args.mechanism)
    profile = BidProfile.load(args.bids)
    out = run_auction(mech, profile, args.seed)
    _emit({"mechanism": str(mech), "seed": args.seed, **out.to_dict()})
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = ExperimentConfig.load(args.config)
    output = args.output or config.output
    if output is None:
        raise ValueError("no output path: pass --output or set 'output' in the config")
    csv_path = args.csv or config.csv
    report = run_experiment(config, workers=args.workers)
    write_report(report, output, csv_path)
    agg = report["aggregate"]
    sys.stderr.write(
        f"wrote {output}: {agg['instances']} instances, min ratio {agg['min_ratio']}, "
        f"{'pass' if report['pass'] else 'FAIL'}\n"
    )
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def cmd_verify_lemmas(args) -> int:
    profile = BidProfile.load(args.bids)
    report = estimate_event_frequencies(profile, args.trials, args.seed)
    report["pass_all"] = all(report["pass"].values())
    _emit(report)
    return EXIT_OK if report["pass_all"] else EXIT_CHECK_FAILED


def cmd_audit(args) -> int:
    mech = MechanismDescriptor.parse(args.mechanism)
    profile = BidProfile.load(args.bids)
    seeds = list(range(args.seed, args.seed + args.seeds))
    violations = audit_truthfulness(mech, profile, args.bidder, _parse_grid(args.grid), seeds)
    _emit(
        {
            "mechanism": str(mech),
            "seeds": len(seeds),
            "violations": [v.to_dict() for v in violations[: args.max_report]],
            "violation_count": len(violations),
        }
    )
    return EXIT_CHECK_FAILED if violations else EXIT_OK


def cmd_generate(args) -> int:
    params = dict(_parse_param(p) for p in args.param)
    gen = InstanceGenerator(args.family, params, args.seed)
    profile = generate_instance(gen, args.index)
    text = profile.to_json() + "\n"
    if args.output:
        atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybrid-auction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("benchmark", help="F2, M2 and the optimal ladders of a bid file")
    p.add_argument("--bids", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("run", help="one mechanism run")
    p.add_argument("--mechanism", default="hybrid", help="hybrid | rsop | fixed:<price>")
    p.add_argument("--bids", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="run an experiment config and write its report")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--csv")
    p.add_argument("--workers", type=int, default=None, help="default: $HYBRID_AUCTION_WORKERS or 1")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-lemmas", help="empirical E1/E2 frequencies against their floors")
    p.add_argument("--bids", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("audit-truthfulness", help="search for profitable misreports")
    p.add_argument("--mechanism", default="hybrid")
    p.add_argument("--bids", required=True)
    p.add_argument("--bidder", type=int, default=None, help="default: every bidder")
    p.add_argument("--grid", default="0:16")
    p.add_argument("--seeds", type=int, default=32, help="number of consecutive seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--max-report", type=int, default=50)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("generate", help="write one generated instance")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--param", action="append", default=[], help="key=value, repeatable")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", None) is None and args.command == "simulate":
        args.workers = default_workers()
    try:
        return args.func(args)
    except (ValueError, IndexError, KeyError, OSError) as exc:
        sys.stderr.write(f"hybrid-auction {args.command}: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
