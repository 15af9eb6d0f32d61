"""trainer command line.

Trains on a samples JSONL and reports per-epoch loss plus train-set
exact match as JSON: {"loss": [...], "train_em": float}. Exit codes:
0 success, 1 file errors, 2 config/data errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .training import ConfigError, EmptyCorpusError, TrainerConfig, evaluate_em, train


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trainer",
        description="Toy encoder-decoder trainer for edit-sample corpora.",
    )
    parser.add_argument("--corpus", required=True, help="samples JSONL")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--report", default=None, help="write the report JSON here (default stdout)")
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--vocab-cap", type=int, default=None)
    parser.add_argument("--max-input", type=int, default=None, dest="max_input_len")
    parser.add_argument("--max-target", type=int, default=None, dest="max_target_len")
    parser.add_argument("--skip-em", action="store_true", help="skip the decode pass")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {
        name: getattr(args, name)
        for name in (
            "epochs",
            "seed",
            "lr",
            "batch_size",
            "vocab_cap",
            "max_input_len",
            "max_target_len",
        )
        if getattr(args, name) is not None
    }
    try:
        cfg = dataclasses.replace(TrainerConfig(), **overrides)
        result = train(args.corpus, cfg)
        report = {"loss": result.history}
        if not args.skip_em:
            report["train_em"] = evaluate_em(result.model, args.corpus)
    except (ConfigError, EmptyCorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
