"""Corpus pipeline: ingest edit records, filter, emit training samples.

Input is JSONL with one record per line:

    {"id": "...", "old": "...", "new": "...", "nl": "...", "lang": "java"}

(nl and lang optional). Output is JSONL with one sample per line:

    {"id", "task", "input", "target", "t", "seed"}

plus a stats JSON written next to the output file. Builds are
deterministic: every sample's randomness comes from a seed derived from
(global_seed, record id, task), so worker count and scheduling never
change the output bytes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .diff import line_diff_hunks, token_diff
from .evolution import EmptyDiffError, build_path, edr_samples
from .lexer import canonical, profile_for_lang, token_texts
from .noising import (
    NoiseConfig,
    NoKeepError,
    SentinelOverflowError,
    Task,
    TASK_ORDER,
    TrainingSample,
    dae_sample,
    ksm_sample,
    rm_sample,
)

log = logging.getLogger(__name__)

SEED_ENV_VAR = "DIVOT_SEED"


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    old: str
    new: str
    nl: str | None = None
    lang: str | None = None


@dataclass(frozen=True)
class BuildConfig:
    noise: NoiseConfig = NoiseConfig()
    hunk_gap: int = 3
    edr_cap: int = 16
    max_tokens_per_side: int = 2048
    global_seed: int = 0
    tasks_enabled: tuple[str, ...] = ("ksm", "rm", "dae", "edr")
    test_set_paths: tuple[str, ...] = ()
    include_nl: bool = True

    def to_dict(self) -> dict:
        return {
            "noise": self.noise.to_dict(),
            "hunk_gap": self.hunk_gap,
            "edr_cap": self.edr_cap,
            "max_tokens_per_side": self.max_tokens_per_side,
            "global_seed": self.global_seed,
            "tasks_enabled": list(self.tasks_enabled),
            "test_set_paths": list(self.test_set_paths),
            "include_nl": self.include_nl,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BuildConfig":
        known = {f: obj[f] for f in obj if f in cls.__dataclass_fields__}
        if "noise" in known:
            known["noise"] = NoiseConfig.from_dict(known["noise"])
        for key in ("tasks_enabled", "test_set_paths"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)

    @classmethod
    def from_json(cls, path: str | Path) -> "BuildConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class CorpusStats:
    records_in: int = 0
    records_kept: int = 0
    records_deduped: int = 0
    records_skipped_empty_diff: int = 0
    records_skipped_oversize: int = 0
    records_skipped_empty_code: int = 0
    lines_malformed: int = 0
    samples_per_task: dict = field(
        default_factory=lambda: {t.value: 0 for t in TASK_ORDER}
    )
    task_skips: dict = field(default_factory=dict)
    samples_total: int = 0
    mean_hunks: float = 0.0
    amplification: float = 0.0

    def to_dict(self) -> dict:
        return {
            "records_in": self.records_in,
            "records_kept": self.records_kept,
            "records_deduped": self.records_deduped,
            "records_skipped_empty_diff": self.records_skipped_empty_diff,
            "records_skipped_oversize": self.records_skipped_oversize,
            "records_skipped_empty_code": self.records_skipped_empty_code,
            "lines_malformed": self.lines_malformed,
            "samples_per_task": dict(self.samples_per_task),
            "task_skips": dict(self.task_skips),
            "samples_total": self.samples_total,
            "mean_hunks": self.mean_hunks,
            "amplification": self.amplification,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CorpusStats":
        known = {f: obj[f] for f in obj if f in cls.__dataclass_fields__}
        return cls(**known)


def derive_seed(global_seed: int, record_id: str, task: str) -> int:
    """Stable 64-bit per-(record, task) seed; independent of scheduling."""
    payload = f"{global_seed}\x1f{record_id}\x1f{task}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def _parse_record(line: str, lineno: int, path: str) -> CorpusRecord | None:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        log.warning("%s:%d: not valid JSON (%s)", path, lineno, exc.msg)
        return None
    if not isinstance(obj, dict):
        log.warning("%s:%d: record is not an object", path, lineno)
        return None
    rec_id = obj.get("id")
    if isinstance(rec_id, int):
        rec_id = str(rec_id)
    old = obj.get("old")
    new = obj.get("new")
    if not isinstance(rec_id, str) or not rec_id:
        log.warning("%s:%d: missing or empty id", path, lineno)
        return None
    if not isinstance(old, str) or not old or not isinstance(new, str) or not new:
        log.warning("%s:%d: old/new must be non-empty strings", path, lineno)
        return None
    nl = obj.get("nl")
    if not isinstance(nl, str) or not nl.strip():
        nl = None
    lang = obj.get("lang")
    if not isinstance(lang, str) or not lang.strip():
        lang = None
    return CorpusRecord(id=rec_id, old=old, new=new, nl=nl, lang=lang)


def ingest(path: str | Path) -> Iterator[CorpusRecord]:
    """Yield valid records from a JSONL file; malformed lines and
    duplicate ids are skipped with a warning."""
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = _parse_record(line, lineno, str(path))
            if rec is None:
                continue
            if rec.id in seen:
                log.warning("%s:%d: duplicate id %r", path, lineno, rec.id)
                continue
            seen.add(rec.id)
            yield rec


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


class SubstringFilter:
    """Aho-Corasick multi-pattern containment over whitespace-normalized text.

    matches() walks the haystack once regardless of pattern count.
    """

    def __init__(self, patterns: Iterable[str]):
        self._goto: list[dict[str, int]] = [{}]
        self._fail = [0]
        self._hit = [False]
        n_patterns = 0
        for pattern in patterns:
            pattern = _collapse_ws(pattern)
            if not pattern:
                continue
            n_patterns += 1
            state = 0
            for ch in pattern:
                nxt = self._goto[state].get(ch)
                if nxt is None:
                    self._goto.append({})
                    self._fail.append(0)
                    self._hit.append(False)
                    nxt = len(self._goto) - 1
                    self._goto[state][ch] = nxt
                state = nxt
            self._hit[state] = True
        self.pattern_count = n_patterns

        queue = deque()
        for child in self._goto[0].values():
            queue.append(child)
        while queue:
            state = queue.popleft()
            for ch, child in self._goto[state].items():
                queue.append(child)
                f = self._fail[state]
                while f and ch not in self._goto[f]:
                    f = self._fail[f]
                self._fail[child] = self._goto[f].get(ch, 0)
                self._hit[child] = self._hit[child] or self._hit[self._fail[child]]

    def matches(self, *texts: str) -> bool:
        """True if any pattern occurs in any of the normalized texts."""
        if self.pattern_count == 0:
            return False
        # One scan: texts joined on newline, which normalization has
        # removed from both patterns and haystacks, so no false joins.
        haystack = "\n".join(_collapse_ws(t) for t in texts)
        state = 0
        for ch in haystack:
            while state and ch not in self._goto[state]:
                state = self._fail[state]
            state = self._goto[state].get(ch, 0)
            if self._hit[state]:
                return True
        return False


def load_test_set_filter(paths: Sequence[str | Path]) -> SubstringFilter:
    """Read test-set JSONL files (each line an object with a `code` field)."""
    patterns: list[str] = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    code = obj["code"]
                except (json.JSONDecodeError, TypeError, KeyError):
                    log.warning("%s:%d: expected an object with a code field", path, lineno)
                    continue
                if isinstance(code, str) and code.strip():
                    patterns.append(code)
    return SubstringFilter(patterns)


@dataclass
class _RecordResult:
    samples: list[dict]
    skip: str | None = None  # oversize | empty_diff | empty_code
    hunk_count: int = 0
    task_skips: dict = field(default_factory=dict)


def emit_record(record: CorpusRecord, cfg: BuildConfig) -> _RecordResult:
    """All enabled samples for one record, in task order then ascending t."""
    profile = profile_for_lang(record.lang)
    old_tokens = token_texts(record.old, profile)
    new_tokens = token_texts(record.new, profile)
    if max(len(old_tokens), len(new_tokens)) > cfg.max_tokens_per_side:
        return _RecordResult([], skip="oversize")

    old_code = canonical(record.old, profile)
    new_code = canonical(record.new, profile)
    if not old_code or not new_code:
        return _RecordResult([], skip="empty_code")
    if old_code == new_code:
        return _RecordResult([], skip="empty_diff")

    nl = record.nl if cfg.include_nl else None
    enabled = [t for t in TASK_ORDER if t.value in cfg.tasks_enabled]
    hunks = line_diff_hunks(record.old, record.new, gap=cfg.hunk_gap)

    result = _RecordResult([], hunk_count=len(hunks))
    for task in enabled:
        seed = derive_seed(cfg.global_seed, record.id, task.value)
        try:
            if task is Task.KSM:
                script = token_diff(old_tokens, new_tokens)
                samples = [
                    ksm_sample(
                        old_tokens, script, new_code, cfg.noise, seed,
                        nl=nl, record_id=record.id,
                    )
                ]
            elif task is Task.RM:
                samples = [
                    rm_sample(
                        old_tokens, new_code, cfg.noise, seed,
                        nl=nl, record_id=record.id,
                    )
                ]
            elif task is Task.DAE:
                samples = [
                    dae_sample(
                        old_tokens, new_code, cfg.noise, seed,
                        nl=nl, record_id=record.id,
                    )
                ]
            else:
                path = build_path(
                    record.old, record.new, hunks, profile, record_id=record.id
                )
                samples = edr_samples(path, cfg.edr_cap, seed, nl=nl)
        except (NoKeepError, SentinelOverflowError, EmptyDiffError) as exc:
            result.task_skips[task.value] = result.task_skips.get(task.value, 0) + 1
            log.debug("record %s: %s skipped (%s)", record.id, task.value, exc)
            continue
        result.samples.extend(s.to_dict() for s in samples)
    return result


def _emit_for_pool(args: tuple[CorpusRecord, BuildConfig]) -> _RecordResult:
    return emit_record(*args)


def build(
    records: Iterable[CorpusRecord] | str | Path,
    out_path: str | Path,
    cfg: BuildConfig | None = None,
    workers: int = 1,
) -> CorpusStats:
    """Build a training corpus; returns (and writes next to the output)
    the corpus stats. `records` may be a JSONL path or an iterable."""
    if cfg is None:
        # Only a caller that made no seeding decision falls back to the
        # environment; an explicit config always wins.
        cfg = BuildConfig()
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            cfg = replace(cfg, global_seed=int(env_seed))

    stats = CorpusStats()
    if isinstance(records, (str, Path)):
        record_list = []
        with open(records, "r", encoding="utf-8") as fh:
            seen: set[str] = set()
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                rec = _parse_record(line, lineno, str(records))
                if rec is None or rec.id in seen:
                    if rec is not None:
                        log.warning("%s:%d: duplicate id %r", records, lineno, rec.id)
                    stats.lines_malformed += 1
                    continue
                seen.add(rec.id)
                record_list.append(rec)
    else:
        record_list = list(records)
    stats.records_in = len(record_list)

    test_filter = load_test_set_filter(cfg.test_set_paths)
    surviving: list[CorpusRecord] = []
    for rec in record_list:
        if test_filter.matches(rec.old, rec.new):
            stats.records_deduped += 1
        else:
            surviving.append(rec)

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    hunk_counts: list[int] = []
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        if workers <= 1:
            results = (emit_record(rec, cfg) for rec in surviving)
        else:
            pool = ProcessPoolExecutor(max_workers=workers)
            chunk = max(1, len(surviving) // (workers * 4) or 1)
            results = pool.map(
                _emit_for_pool, ((rec, cfg) for rec in surviving), chunksize=chunk
            )
        try:
            for result in results:
                if result.skip == "oversize":
                    stats.records_skipped_oversize += 1
                    continue
                if result.skip == "empty_diff":
                    stats.records_skipped_empty_diff += 1
                    continue
                if result.skip == "empty_code":
                    stats.records_skipped_empty_code += 1
                    continue
                stats.records_kept += 1
                hunk_counts.append(result.hunk_count)
                for task, count in result.task_skips.items():
                    stats.task_skips[task] = stats.task_skips.get(task, 0) + count
                for sample in result.samples:
                    stats.samples_per_task[sample["task"]] += 1
                    stats.samples_total += 1
                    out.write(json.dumps(sample, ensure_ascii=True) + "\n")
        finally:
            if workers > 1:
                pool.shutdown()

    if hunk_counts:
        stats.mean_hunks = sum(hunk_counts) / len(hunk_counts)
    if stats.records_kept:
        stats.amplification = stats.samples_total / stats.records_kept

    stats_path = stats_path_for(out_path)
    with open(stats_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats.to_dict(), fh, indent=2)
        fh.write("\n")
    return stats


def stats_path_for(corpus_path: str | Path) -> Path:
    return Path(corpus_path).with_suffix(".stats.json")


def recompute_stats(corpus_path: str | Path) -> CorpusStats:
    """Stats recomputed from a corpus file.

    Everything derivable from the samples themselves is recomputed
    (per-task counts, mean hunk count via the largest edr t per record,
    amplification). Input-side counters can't be recovered from the
    output alone, so they are carried over from the sibling stats file
    when it exists and agrees on the sample counts.
    """
    stats = CorpusStats()
    max_t: dict[str, int] = {}
    record_ids: dict[str, None] = {}
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            sample = json.loads(line)
            task = sample["task"]
            stats.samples_per_task[task] = stats.samples_per_task.get(task, 0) + 1
            stats.samples_total += 1
            record_ids[sample["id"]] = None
            if task == Task.EDR.value and sample.get("t") is not None:
                max_t[sample["id"]] = max(max_t.get(sample["id"], 0), sample["t"])
    stats.records_kept = len(record_ids)
    stats.records_in = stats.records_kept
    if max_t:
        # The edr subsample always keeps t == T, so the per-record max is
        # exactly the hunk count.
        stats.mean_hunks = sum(max_t.values()) / len(max_t)
    if stats.records_kept:
        stats.amplification = stats.samples_total / stats.records_kept

    sidecar = stats_path_for(corpus_path)
    if sidecar.exists():
        try:
            with open(sidecar, "r", encoding="utf-8") as fh:
                built = CorpusStats.from_dict(json.load(fh))
        except (json.JSONDecodeError, TypeError):
            log.warning("ignoring unreadable stats sidecar %s", sidecar)
            return stats
        if (
            built.samples_total == stats.samples_total
            and built.records_kept == stats.records_kept
        ):
            for name in (
                "records_in",
                "records_deduped",
                "records_skipped_empty_diff",
                "records_skipped_oversize",
                "records_skipped_empty_code",
                "lines_malformed",
                "task_skips",
            ):
                setattr(stats, name, getattr(built, name))
            stats.mean_hunks = built.mean_hunks
    return stats


def sample_corpus_path() -> Path:
    """Path of the bundled 500-record sample corpus."""
    return Path(__file__).parent / "data" / "sample_corpus.jsonl"
