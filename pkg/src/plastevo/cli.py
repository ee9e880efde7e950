"""Command-line entry point.

Global flags (accepted before or after the subcommand): --config, --seed,
--out, --jobs. Every subcommand prints a JSON summary to stdout and, when
--out is given, writes its result files (CSV tables, rule harvests,
generation histories, weight snapshots, summary.json) into that directory.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigurationError
from . import harness


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="flat key = value config file")
    common.add_argument("--seed", type=int, default=None, metavar="U64",
                        help="master seed (overrides config)")
    common.add_argument("--out", default=None, metavar="DIR",
                        help="output directory for result files")
    common.add_argument("--jobs", type=int, default=None, metavar="N",
                        help="worker processes for parallel sections")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="plastevo",
        parents=[common],
        description="Evolve and evaluate synaptic-plasticity rules on "
                    "seasonal grid-world tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", parents=[common],
                       help="run the genetic algorithm over rule genotypes")
    p.add_argument("--task", choices=sorted(harness.TASK_DEFAULTS), default=None)

    p = sub.add_parser("run-rule", parents=[common],
                       help="evaluate one rule over seeded lifetime trials")
    p.add_argument("--rule", default=None,
                   help="catalog name or 'eta=...;m-1=...;m+1=...'")
    p.add_argument("--task", choices=sorted(harness.TASK_DEFAULTS), default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--logs", action="store_true",
                   help="also write one step-log CSV per trial")

    p = sub.add_parser("hillclimb", parents=[common],
                       help="weight-space hill climbing baseline")
    p.add_argument("--task", choices=sorted(harness.TASK_DEFAULTS), default=None)
    p.add_argument("--runs", type=int, default=None)

    p = sub.add_parser("perfect-agent", parents=[common],
                       help="hand-coded greedy foraging baseline")
    p.add_argument("--runs", type=int, default=None)

    p = sub.add_parser("validate", parents=[common],
                       help="learning trial with periodic frozen-weight tests")
    p.add_argument("--rule", default=None)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("sweep-hidden", parents=[common],
                       help="fitness vs hidden-layer size")
    p.add_argument("--rule", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sizes", default=None, metavar="N,N,...")

    p = sub.add_parser("analyze", parents=[common],
                       help="aggregate harvested rules by discrete pattern")
    p.add_argument("harvests", nargs="+", metavar="HARVEST_TSV")

    p = sub.add_parser("wilcoxon", parents=[common],
                       help="two-sided rank-sum test between two samples")
    p.add_argument("sample_a", metavar="FILE_A")
    p.add_argument("sample_b", metavar="FILE_B")

    p = sub.add_parser("bench", parents=[common],
                       help="time the compiled kernel against the pure one")
    p.add_argument("--task", choices=sorted(harness.TASK_DEFAULTS), default=None)
    p.add_argument("--rule", default=None)

    return parser


def _config_from_args(args) -> harness.ExperimentConfig:
    overrides = {}
    for cli_name, field in (
        ("seed", "seed"), ("out", "out"), ("jobs", "jobs"), ("task", "task"),
        ("rule", "rule"), ("trials", "trials"), ("runs", "runs"),
        ("sizes", "sweep_sizes"),
    ):
        value = getattr(args, cli_name, None)
        if value is not None:
            overrides[field] = value
    return harness.load_config(args.config, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "evolve":
            summary = harness.experiment_evolve(cfg)
        elif args.command == "run-rule":
            summary = harness.experiment_run_rule(cfg, write_logs=args.logs)
        elif args.command == "hillclimb":
            summary = harness.experiment_hillclimb(cfg)
        elif args.command == "perfect-agent":
            summary = harness.experiment_perfect_agent(cfg)
        elif args.command == "validate":
            summary = harness.experiment_validate(cfg)
        elif args.command == "sweep-hidden":
            summary = harness.experiment_sweep_hidden(cfg)
        elif args.command == "analyze":
            summary = harness.experiment_analyze(cfg, args.harvests)
        elif args.command == "wilcoxon":
            summary = harness.experiment_wilcoxon(cfg, args.sample_a, args.sample_b)
        else:
            summary = harness.experiment_bench(cfg)
    except (ConfigurationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
