"""Edit evolution paths: the intermediate states between old and new.

Hunks are applied one at a time in file order, so a record whose diff
has T hunks yields T+1 states, from the untouched old code down to the
new code. Each state is stored in its canonical rendering (comment-free,
single-spaced); the raw multi-line texts are kept alongside for
re-diffing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .diff import Hunk, apply_hunks, normalize_newlines
from .lexer import GENERIC, LanguageProfile, canonical
from .noising import Task, TrainingSample, format_input, round_half_up


class EmptyDiffError(ValueError):
    """No hunks: old and new are identical, the record should be skipped."""


@dataclass(frozen=True)
class EvolutionPath:
    """States ordered from old (first) to new (last).

    `states` are canonical renderings; `raw_states` the underlying line
    texts. hunk_count == len(states) - 1.
    """

    record_id: str
    states: tuple[str, ...]
    raw_states: tuple[str, ...]
    hunk_count: int


def build_path(
    old_text: str,
    new_text: str,
    hunks: Sequence[Hunk],
    profile: LanguageProfile = GENERIC,
    record_id: str = "",
) -> EvolutionPath:
    """Apply `hunks` (from line_diff_hunks on the same pair) step by step."""
    if not hunks:
        raise EmptyDiffError("no hunks between old and new text")
    ordered = sorted(hunks, key=lambda h: h.old_start)
    raw_states = [normalize_newlines(old_text)]
    for i in range(1, len(ordered) + 1):
        raw_states.append(apply_hunks(old_text, ordered[:i]))
    return EvolutionPath(
        record_id=record_id,
        states=tuple(canonical(raw, profile) for raw in raw_states),
        raw_states=tuple(raw_states),
        hunk_count=len(ordered),
    )


def edr_steps(total: int, cap: int) -> list[int]:
    """The evolution steps t (1..total) kept under `cap`, oldest first.

    When total exceeds cap, a uniformly spaced deterministic subsample is
    taken; the full step t == total (the untouched old code) is always
    included.
    """
    if total < 1:
        return []
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if total <= cap:
        return list(range(1, total + 1))
    return [round_half_up((i + 1) * total / cap) for i in range(cap)]


def edr_samples(
    path: EvolutionPath,
    cap: int,
    seed: int,
    *,
    nl: str | None = None,
) -> list[TrainingSample]:
    """One sample per kept step t: input is state X_t (t hunks still to
    apply), target is the final state. Ordered by ascending t."""
    total = path.hunk_count
    final = path.states[-1]
    samples = []
    for t in edr_steps(total, cap):
        # states[] runs old->new, so X_t (t hunks remaining) sits at total - t.
        state = path.states[total - t]
        samples.append(
            TrainingSample(
                record_id=path.record_id,
                task=Task.EDR,
                input=format_input(Task.EDR, state, nl),
                target=final,
                seed=seed,
                t_index=t,
                meta={"hunk_count": total},
            )
        )
    return samples
