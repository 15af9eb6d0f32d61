"""divot-forge command line.

Verbs: diff, evolve, build, stats, score. Machine output (JSON/JSONL)
goes to stdout or the --out file; diagnostics go to stderr. Exit codes:
0 success, 1 runtime errors (missing files, bad data), 2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import metrics as metrics_mod
from .diff import line_diff_hunks, token_diff
from .evolution import build_path, edr_steps
from .lexer import BUILTIN_PROFILES, LanguageProfile, profile_for_lang, token_texts
from .noising import NoiseConfig

log = logging.getLogger("divot_forge")

_DEFAULT_METRICS = "em,bleu,sari,codebleu"


def _profile_from_args(args) -> LanguageProfile:
    if getattr(args, "profile", None):
        return LanguageProfile.from_json(args.profile)
    return profile_for_lang(getattr(args, "lang", None))


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_diff(args) -> int:
    profile = _profile_from_args(args)
    old = _read_text(args.old)
    new = _read_text(args.new)
    if args.hunks:
        hunks = line_diff_hunks(old, new, gap=args.gap)
        _emit([h.to_dict() for h in hunks])
    else:
        script = token_diff(token_texts(old, profile), token_texts(new, profile))
        _emit(script.to_dict())
    return 0


def _cmd_evolve(args) -> int:
    profile = _profile_from_args(args)
    old = _read_text(args.old)
    new = _read_text(args.new)
    hunks = line_diff_hunks(old, new, gap=args.gap)
    if not hunks:
        print("old and new are identical: no evolution path", file=sys.stderr)
        return 1
    path = build_path(old, new, hunks, profile)
    _emit(
        {
            "hunk_count": path.hunk_count,
            "kept_steps": edr_steps(path.hunk_count, args.cap),
            "states": list(path.states),
        }
    )
    return 0


def _build_config(args) -> corpus_mod.BuildConfig:
    if args.config:
        cfg = corpus_mod.BuildConfig.from_json(args.config)
    else:
        cfg = corpus_mod.BuildConfig()
    noise_overrides = {
        name: getattr(args, name)
        for name in (
            "ksm_rate",
            "rm_rate",
            "dae_replace",
            "dae_delete",
            "dae_insert",
        )
        if getattr(args, name) is not None
    }
    if noise_overrides:
        cfg = dataclasses.replace(
            cfg, noise=dataclasses.replace(cfg.noise, **noise_overrides)
        )
    overrides: dict = {}
    if args.gap is not None:
        overrides["hunk_gap"] = args.gap
    if args.cap is not None:
        overrides["edr_cap"] = args.cap
    if args.max_tokens is not None:
        overrides["max_tokens_per_side"] = args.max_tokens
    if args.tasks is not None:
        overrides["tasks_enabled"] = tuple(t.strip() for t in args.tasks.split(",") if t.strip())
    if args.test_set:
        overrides["test_set_paths"] = tuple(args.test_set)
    if args.no_nl:
        overrides["include_nl"] = False
    # Seed precedence: --seed flag, then DIVOT_SEED, then the config file.
    if args.seed is not None:
        overrides["global_seed"] = args.seed
    elif os.environ.get(corpus_mod.SEED_ENV_VAR) is not None:
        overrides["global_seed"] = int(os.environ[corpus_mod.SEED_ENV_VAR])
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _cmd_build(args) -> int:
    cfg = _build_config(args)
    stats = corpus_mod.build(args.infile, args.out, cfg, workers=args.workers)
    _emit(stats.to_dict())
    return 0


def _cmd_stats(args) -> int:
    stats = corpus_mod.recompute_stats(args.infile)
    _emit(stats.to_dict())
    return 0


def _cmd_score(args) -> int:
    profile = _profile_from_args(args)
    metric_names = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    if args.src is None and args.metrics == _DEFAULT_METRICS and "sari" in metric_names:
        # Only an explicit request for sari without --src is an error.
        log.warning("no --src given, skipping sari")
        metric_names = tuple(m for m in metric_names if m != "sari")
    report = metrics_mod.score_files(
        args.pred,
        args.gold,
        src_path=args.src,
        metrics=metric_names,
        normalize=args.normalize,
        profile=profile,
        corpus_bleu=args.corpus_bleu,
    )
    _emit(report.to_dict())
    return 0


def _add_profile_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lang", default=None, help="builtin language profile (java, generic)")
    parser.add_argument("--profile", default=None, help="path to a language profile JSON")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divot-forge",
        description="Corpus engineering for edit-directed code models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", help="token edit script or line hunks for one file pair")
    p.add_argument("--old", required=True)
    p.add_argument("--new", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--tokens", action="store_true", help="token edit script (default)")
    mode.add_argument("--hunks", action="store_true", help="line-level hunks")
    p.add_argument("--gap", type=int, default=3, help="unchanged lines separating hunks")
    _add_profile_args(p)
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("evolve", help="intermediate states between old and new")
    p.add_argument("--old", required=True)
    p.add_argument("--new", required=True)
    p.add_argument("--gap", type=int, default=3)
    p.add_argument("--cap", type=int, default=16, help="max kept evolution steps")
    _add_profile_args(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("build", help="build a training corpus from edit records")
    p.add_argument("--in", dest="infile", required=True, help="records JSONL")
    p.add_argument("--out", required=True, help="output samples JSONL")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="BuildConfig JSON")
    p.add_argument("--tasks", default=None, help="comma list from ksm,rm,dae,edr")
    p.add_argument("--test-set", action="append", default=[], help="test-set JSONL to dedup against (repeatable)")
    p.add_argument("--gap", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--ksm-rate", type=float, default=None)
    p.add_argument("--rm-rate", type=float, default=None)
    p.add_argument("--dae-replace", type=float, default=None)
    p.add_argument("--dae-delete", type=float, default=None)
    p.add_argument("--dae-insert", type=float, default=None)
    p.add_argument("--no-nl", action="store_true", help="drop NL guidance from inputs")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("stats", help="recompute stats from a built corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("score", help="score predictions against references")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--src", default=None, help="pre-edit sources (needed for sari)")
    p.add_argument("--metrics", default=_DEFAULT_METRICS)
    p.add_argument("--normalize", action="store_true", help="normalize before exact match")
    p.add_argument("--corpus-bleu", action="store_true")
    _add_profile_args(p)
    p.set_defaults(func=_cmd_score)

    return parser


def run(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (metrics_mod.LengthMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
