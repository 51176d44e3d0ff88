"""Command line interface.

Subcommands mirror the evaluation workflow: generate a synthetic
dataset, prepare it, train the baseline, run inference, score a
predictions file, and render a leaderboard from a score matrix.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import BudgetExceededError, EcgTriageError
from .forest import ForestConfig
from .harness import (EXIT_BUDGET, EXIT_ERROR, EXIT_OK, EXIT_VALIDATION,
                      PrepareConfig, RunBudget, parse_prepare_config)
from .kernels import BACKEND
from .scoring_io import summary_line
from .synth import SynthConfig, generate_dataset


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecgtriage",
        description="Capacity-constrained triage evaluation for 12-lead ECGs.")
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a deterministic synthetic dataset")
    p.add_argument("out_dir")
    p.add_argument("--records", type=int, default=1000)
    p.add_argument("--prevalence", type=float, default=0.05)
    p.add_argument("--fs", type=float, default=400.0)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--effect-size", type=float, default=0.0,
                   help="planted signal strength; 0 gives label-independent records")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("prepare", help="trim, cap ages, rebalance, augment")
    p.add_argument("input_dir")
    p.add_argument("out_dir")
    p.add_argument("--config", help="key = value file (target_prevalence, seed)")
    p.add_argument("--target-prevalence",
                   help="overrides the config file when given")
    p.add_argument("--seed", type=int, help="overrides the config file when given")

    p = sub.add_parser("train", help="fit the random-forest baseline")
    p.add_argument("dataset_dir")
    p.add_argument("model_path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=ForestConfig.n_trees)
    p.add_argument("--depth", type=int, default=ForestConfig.max_depth)
    p.add_argument("--min-leaf", type=int, default=ForestConfig.min_leaf)
    p.add_argument("--features-per-split", type=int,
                   default=ForestConfig.features_per_split)
    p.add_argument("--train-limit", type=float, default=RunBudget.train_limit,
                   help="training wall-clock budget in seconds")

    p = sub.add_parser("infer", help="sequential per-record inference")
    p.add_argument("model_path")
    p.add_argument("dataset_dir")
    p.add_argument("out_path")
    p.add_argument("--infer-limit", type=float, default=RunBudget.infer_limit,
                   help="inference wall-clock budget in seconds")

    p = sub.add_parser("score", help="score predictions against labels")
    p.add_argument("labels", help="dataset directory or labels CSV")
    p.add_argument("predictions")
    p.add_argument("--capacity", type=float, default=harness.DEFAULT_CAPACITY,
                   help="fraction of the cohort that can be confirmed")
    p.add_argument("--report", help="also write the full key=value report here")

    p = sub.add_parser("leaderboard", help="rank entries from a score matrix")
    p.add_argument("matrix", help="CSV with header entry,<dataset>,...")
    p.add_argument("--validation",
                   help="dataset column excluded from the ranking mean")
    p.add_argument("--out", help="write the table here instead of stdout")

    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "generate":
        config = SynthConfig(n_records=args.records, prevalence=args.prevalence,
                             fs=args.fs, duration=args.duration,
                             effect_size=args.effect_size, seed=args.seed)
        manifest = generate_dataset(config, args.out_dir)
        print(f"generated {manifest.total} records "
              f"({manifest.positives} positive) in {args.out_dir}")
        return EXIT_OK

    if args.command == "prepare":
        if args.config is not None:
            config = parse_prepare_config(
                Path(args.config).read_text(encoding="ascii"))
        else:
            config = PrepareConfig()
        if args.target_prevalence is not None:
            config = parse_prepare_config(
                f"target_prevalence = {args.target_prevalence}\n"
                f"seed = {args.seed if args.seed is not None else config.seed}")
        elif args.seed is not None:
            config.seed = args.seed
        manifest = harness.cmd_prepare(args.input_dir, args.out_dir, config)
        print(f"prepared {manifest.total} records "
              f"({manifest.positives} positive, prevalence "
              f"{float(manifest.prevalence):.4%}) in {args.out_dir}")
        return EXIT_OK

    if args.command == "train":
        config = ForestConfig(n_trees=args.trees, max_depth=args.depth,
                              min_leaf=args.min_leaf,
                              features_per_split=args.features_per_split)
        budget = RunBudget(train_limit=args.train_limit)
        model = harness.cmd_train(args.dataset_dir, args.model_path,
                                  config, args.seed, budget)
        print(f"trained {len(model.trees)}-tree model -> {args.model_path} "
              f"(backend: {BACKEND})")
        return EXIT_OK

    if args.command == "infer":
        budget = RunBudget(infer_limit=args.infer_limit)
        rows, code = harness.cmd_infer(args.model_path, args.dataset_dir,
                                       args.out_path, budget)
        failed = sum(1 for row in rows if row.probability is None)
        print(f"wrote {len(rows)} predictions ({failed} failed) -> {args.out_path}")
        return code

    if args.command == "score":
        report = harness.cmd_score(args.labels, args.predictions,
                                   args.capacity, args.report)
        for warning in report.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        print(summary_line(report))
        return EXIT_OK

    if args.command == "leaderboard":
        datasets, entries = harness.read_score_matrix(args.matrix)
        board = harness.cmd_leaderboard(datasets, entries, args.validation)
        text = harness.format_leaderboard(board)
        if args.out is not None:
            Path(args.out).write_text(text, encoding="ascii")
            print(f"wrote leaderboard -> {args.out}")
        else:
            print(text, end="")
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except EcgTriageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
