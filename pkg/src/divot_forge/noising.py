"""Corruption streams that turn one edit record into training samples.

Three corruptions of the old code are produced here; all of them share
the same target, the record's normalized new code:

- ksm: mask a share of the tokens the old→new edit script keeps,
- rm: mask a few random contiguous spans,
- dae: per-token replace/delete noise plus inserted sentinels.

Masked material is replaced by numbered sentinel tokens ([MASK0],
[MASK1], ... left to right). Every function takes an explicit seed and
is deterministic given (inputs, config, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .diff import EditScript, keep_positions


class Task(Enum):
    """The four sample streams; values are the wire-format task names."""

    KSM = "ksm"  # mask kept tokens from the edit script
    RM = "rm"  # mask random spans
    DAE = "dae"  # denoise replace/delete/insert corruption
    EDR = "edr"  # finish the edit from an intermediate state

    @property
    def tag(self) -> str:
        """Input tag token, e.g. [KSM], placed right after [CLS]."""
        return f"[{self.name}]"


TASK_ORDER = (Task.KSM, Task.RM, Task.DAE, Task.EDR)


class NoKeepError(ValueError):
    """The edit script keeps nothing, so there is nothing to mask."""


class SentinelOverflowError(ValueError):
    """Corruption would need more numbered sentinels than the cap allows."""


@dataclass(frozen=True)
class NoiseConfig:
    ksm_rate: float = 0.30
    rm_rate: float = 0.20
    rm_spans: tuple[int, ...] = (2, 3)  # drawn uniformly; mean span count 2.5
    dae_replace: float = 0.10
    dae_delete: float = 0.05
    dae_insert: float = 0.05
    sentinel_prefix: str = "[MASK"
    sentinel_cap: int = 100

    def to_dict(self) -> dict:
        return {
            "ksm_rate": self.ksm_rate,
            "rm_rate": self.rm_rate,
            "rm_spans": list(self.rm_spans),
            "dae_replace": self.dae_replace,
            "dae_delete": self.dae_delete,
            "dae_insert": self.dae_insert,
            "sentinel_prefix": self.sentinel_prefix,
            "sentinel_cap": self.sentinel_cap,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "NoiseConfig":
        known = {f: obj[f] for f in obj if f in cls.__dataclass_fields__}
        if "rm_spans" in known:
            known["rm_spans"] = tuple(known["rm_spans"])
        return cls(**known)


@dataclass(frozen=True)
class TrainingSample:
    """One serialized pre-training example.

    `t_index` is the evolution step for edr samples (None otherwise).
    `meta` holds per-sample corruption counts for audits; it is not part
    of the wire format and is excluded from equality.
    """

    record_id: str
    task: Task
    input: str
    target: str
    seed: int
    t_index: int | None = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "id": self.record_id,
            "task": self.task.value,
            "input": self.input,
            "target": self.target,
            "t": self.t_index,
            "seed": self.seed,
        }


def round_half_up(x: float) -> int:
    """round() half-away-from-zero for non-negative x, e.g. 2.5 -> 3."""
    return int(x + 0.5)


def format_input(task: Task, code: str, nl: str | None = None) -> str:
    """`[CLS] [TAG] nl [SEP] code [SEP]` with NL, `[CLS] [TAG] code [SEP]` without."""
    if not code:
        raise ValueError("code part must be non-empty")
    if nl:
        nl_flat = " ".join(nl.split())
        return f"[CLS] {task.tag} {nl_flat} [SEP] {code} [SEP]"
    return f"[CLS] {task.tag} {code} [SEP]"


def sentinel(cfg: NoiseConfig, i: int) -> str:
    return f"{cfg.sentinel_prefix}{i}]"


_HOLE = object()  # placeholder slot later numbered left to right


def _number_sentinels(seq: list, cfg: NoiseConfig) -> list[str]:
    out: list[str] = []
    i = 0
    for item in seq:
        if item is _HOLE:
            out.append(sentinel(cfg, i))
            i += 1
        else:
            out.append(item)
    if i > cfg.sentinel_cap:
        raise SentinelOverflowError(f"needs {i} sentinels, cap is {cfg.sentinel_cap}")
    return out


def ksm_sample(
    old_tokens: Sequence[str],
    script: EditScript,
    new_code: str,
    cfg: NoiseConfig,
    seed: int,
    *,
    nl: str | None = None,
    record_id: str = "",
) -> TrainingSample:
    """Mask round(ksm_rate * keeps), at least 1, of the script's kept tokens.

    Runs of adjacent masked positions coalesce into a single sentinel.
    Raises NoKeepError when the script keeps nothing.
    """
    keeps = keep_positions(script)
    if not keeps:
        raise NoKeepError("edit script has no keep tokens")
    if script.old_len != len(old_tokens):
        raise ValueError("script does not belong to old_tokens")
    m = max(1, round_half_up(cfg.ksm_rate * len(keeps)))
    m = min(m, len(keeps))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(keeps, m))

    masked = set(chosen)
    seq: list = []
    for i, tok in enumerate(old_tokens):
        if i in masked:
            if seq and seq[-1] is _HOLE and (i - 1) in masked:
                continue  # adjacent masked positions share one sentinel
            seq.append(_HOLE)
        else:
            seq.append(tok)
    corrupted = _number_sentinels(seq, cfg)

    return TrainingSample(
        record_id=record_id,
        task=Task.KSM,
        input=format_input(Task.KSM, " ".join(corrupted), nl),
        target=new_code,
        seed=seed,
        meta={
            "keep_count": len(keeps),
            "masked_count": m,
            "sentinel_count": sum(1 for s in seq if s is _HOLE),
        },
    )


def _split_even(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + 1] * extra + [base] * (parts - extra)


def rm_sample(
    old_tokens: Sequence[str],
    new_code: str,
    cfg: NoiseConfig,
    seed: int,
    *,
    nl: str | None = None,
    record_id: str = "",
) -> TrainingSample:
    """Mask round(rm_rate * M), at least 1, tokens as contiguous spans.

    The span count is drawn from cfg.rm_spans, clipped to the budget;
    span starts are rejection-sampled to avoid overlap (100 tries, then
    the span count is decremented). Each span becomes one sentinel.
    """
    m_len = len(old_tokens)
    if m_len == 0:
        raise ValueError("old_tokens must be non-empty")
    budget = max(1, round_half_up(cfg.rm_rate * m_len))
    budget = min(budget, m_len)
    rng = random.Random(seed)
    n_spans = min(rng.choice(cfg.rm_spans), budget)

    spans: list[tuple[int, int]] | None = None
    while spans is None:
        sizes = _split_even(budget, n_spans)
        for _ in range(100):
            starts = [rng.randrange(m_len - size + 1) for size in sizes]
            candidate = sorted(zip(starts, sizes))
            if all(
                candidate[i][0] + candidate[i][1] <= candidate[i + 1][0]
                for i in range(len(candidate) - 1)
            ):
                spans = [(s, s + size) for s, size in candidate]
                break
        else:
            n_spans -= 1  # give up on this count; one span always fits
    seq: list = []
    pos = 0
    for start, end in spans:
        seq.extend(old_tokens[pos:start])
        seq.append(_HOLE)
        pos = end
    seq.extend(old_tokens[pos:])
    corrupted = _number_sentinels(seq, cfg)

    return TrainingSample(
        record_id=record_id,
        task=Task.RM,
        input=format_input(Task.RM, " ".join(corrupted), nl),
        target=new_code,
        seed=seed,
        meta={
            "token_count": m_len,
            "masked_count": budget,
            "span_count": len(spans),
        },
    )


def dae_sample(
    old_tokens: Sequence[str],
    new_code: str,
    cfg: NoiseConfig,
    seed: int,
    *,
    nl: str | None = None,
    record_id: str = "",
) -> TrainingSample:
    """Replace/delete tokens independently, then insert fresh sentinels.

    Each token is replaced with probability dae_replace or dropped with
    probability dae_delete; round(dae_insert * M) sentinels are inserted
    at uniform positions. If corruption empties the sequence entirely a
    single sentinel stands in so the input stays well-formed.
    """
    m_len = len(old_tokens)
    if m_len == 0:
        raise ValueError("old_tokens must be non-empty")
    rng = random.Random(seed)
    seq: list = []
    n_replaced = 0
    n_deleted = 0
    for tok in old_tokens:
        u = rng.random()
        if u < cfg.dae_replace:
            seq.append(_HOLE)
            n_replaced += 1
        elif u < cfg.dae_replace + cfg.dae_delete:
            n_deleted += 1
        else:
            seq.append(tok)
    n_inserted = round_half_up(cfg.dae_insert * m_len)
    for _ in range(n_inserted):
        seq.insert(rng.randrange(len(seq) + 1), _HOLE)
    if not seq:
        seq.append(_HOLE)
    corrupted = _number_sentinels(seq, cfg)

    return TrainingSample(
        record_id=record_id,
        task=Task.DAE,
        input=format_input(Task.DAE, " ".join(corrupted), nl),
        target=new_code,
        seed=seed,
        meta={
            "token_count": m_len,
            "replaced": n_replaced,
            "deleted": n_deleted,
            "inserted": n_inserted,
            "corrupted_len": len(corrupted),
        },
    )
