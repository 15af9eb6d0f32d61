"""Shared fixtures: the three-hunk walkthrough pair and synthetic record
generators used by the unit suites and the acceptance suite."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import pytest

# A three-part edit: each code line changes, comment lines in between
# stay put. With gap=1 the line diff yields exactly three hunks, and the
# canonical rendering (comments dropped) collapses to three tokens.
WALK_OLD = "Ca\n//k1\nDa\n//k2\nEa\n"
WALK_NEW = "Cb\n//k1\nDb\n//k2\nEb\n"
WALK_STATES = ["Ca Da Ea", "Cb Da Ea", "Cb Db Ea", "Cb Db Eb"]


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def walkthrough_record(rec_id: str = "walk") -> dict:
    return {"id": rec_id, "old": WALK_OLD, "new": WALK_NEW, "lang": "generic"}


_WORDS = (
    "alpha beta gamma delta eps zeta eta theta iota kappa lam mu nu xi "
    "omicron pi rho sigma tau upsilon phi chi psi omega foo bar baz qux"
).split()


def synthetic_record(rng: random.Random, rec_id: str, min_tokens: int = 18) -> dict:
    """One random edit record: a few statement lines, some lines changed.

    Records always keep at least one unchanged line, so every task
    (including ksm) is emittable, and always change at least one token.
    """
    n_lines = rng.randint(4, 8)
    old_lines = []
    for i in range(n_lines):
        width = rng.randint(3, 6)
        words = [rng.choice(_WORDS) for _ in range(width)]
        old_lines.append(" ".join(words) + " ;")
    while sum(len(l.split()) for l in old_lines) < min_tokens:
        old_lines.append(" ".join(rng.choice(_WORDS) for _ in range(4)) + " ;")

    new_lines = list(old_lines)
    n_edits = rng.randint(1, max(1, len(new_lines) - 2))
    for idx in rng.sample(range(len(new_lines)), n_edits):
        words = new_lines[idx].split()
        words[rng.randrange(len(words) - 1)] = rng.choice(_WORDS) + "X"
        new_lines[idx] = " ".join(words)
    return {
        "id": rec_id,
        "old": "\n".join(old_lines) + "\n",
        "new": "\n".join(new_lines) + "\n",
        "nl": rng.choice([None, "tweak the thing", "fix handling"]),
        "lang": "generic",
    }


@pytest.fixture
def walkthrough(tmp_path: Path) -> dict:
    """Walkthrough pair written to disk for CLI-style tests."""
    old = tmp_path / "old.txt"
    new = tmp_path / "new.txt"
    old.write_text(WALK_OLD, encoding="utf-8")
    new.write_text(WALK_NEW, encoding="utf-8")
    return {"old": old, "new": new}


def reference_bleu4(candidate: str, reference: str) -> float:
    """Independent smoothed sentence BLEU-4 written from the formula:
    raw unigram precision, add-one smoothing for orders 2..4, brevity
    penalty exp(1 - r/c) when the candidate is not longer. 0..100."""
    cand = candidate.split()
    ref = reference.split()
    if not cand:
        return 0.0

    def grams(tokens, n):
        table = {}
        for i in range(len(tokens) - n + 1):
            g = tuple(tokens[i : i + n])
            table[g] = table.get(g, 0) + 1
        return table

    log_sum = 0.0
    for n in (1, 2, 3, 4):
        cg = grams(cand, n)
        rg = grams(ref, n)
        match = sum(min(count, rg.get(g, 0)) for g, count in cg.items())
        total = sum(cg.values())
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1) / (total + 1)
        log_sum += math.log(p)
    if len(cand) > len(ref):
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(ref) / len(cand))
    return 100.0 * bp * math.exp(log_sum / 4)
