#!/usr/bin/env python3
"""Regenerate src/divot_forge/data/sample_corpus.jsonl.

Emits 500 deterministic edit records shaped like small Java commits: a
class file before and after a change touching one to five separate
regions, usually with a commit-message style NL line. Rerunning always
produces the same bytes.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

SEED = 717253
N_RECORDS = 500
OUT = Path(__file__).resolve().parents[1] / "src" / "divot_forge" / "data" / "sample_corpus.jsonl"

NOUNS = [
    "count", "total", "index", "offset", "limit", "buffer", "cursor",
    "depth", "size", "weight", "retries", "delay", "budget", "window",
    "score", "quota", "spread", "margin",
]
CLASS_NAMES = [
    "Parser", "Cache", "Router", "Scheduler", "Encoder", "Builder",
    "Scanner", "Tracker", "Mapper", "Filter", "Reader", "Writer",
    "Planner", "Broker", "Loader", "Merger", "Sampler", "Indexer",
]
VERBS = ["update", "reset", "apply", "merge", "flush", "advance", "record", "trim", "scale", "drain"]
MESSAGES = [
    "fix off by one in {m}",
    "guard {m} against negative {n}",
    "rename {n} counter",
    "bump the {n} default",
    "log {m} calls for debugging",
    "tighten the {n} bound check",
    "drop stale {n} handling",
    "Fix NPE when {n} is unset",
    "refactor {m} slightly",
    "use the configured {n} instead of a literal",
]
STRINGS = ["state", "ready", "done", "évalué", "reset", "stale entry", "halt"]


def fresh(rng: random.Random, pool: list[str], used: set[str]) -> str:
    choices = [x for x in pool if x not in used]
    name = rng.choice(choices if choices else pool)
    used.add(name)
    return name


def make_program(rng: random.Random) -> tuple[list[str], list[int], dict]:
    """A small class file plus the line indices safe to edit."""
    used: set[str] = set()
    cls = rng.choice(CLASS_NAMES) + rng.choice(["", "Impl", "Base", ""])
    fields = [fresh(rng, NOUNS, used) for _ in range(rng.randint(2, 3))]
    methods = [fresh(rng, VERBS, used) for _ in range(rng.randint(2, 4))]

    lines: list[str] = []
    sites: list[int] = []  # line indices that edits may target
    lines.append(f"package app.{cls.lower()};")
    lines.append("")
    lines.append("import java.util.List;")
    if rng.random() < 0.4:
        lines.append("import java.util.Map;")
    lines.append("")
    if rng.random() < 0.3:
        lines.append(f"// core bookkeeping for {cls}")
    lines.append(f"public class {cls} {{")
    for name in fields:
        init = rng.choice(["0", "1", "8", "16", "100", "-1"])
        lines.append(f"    private int {name} = {init};")
        sites.append(len(lines) - 1)
    lines.append("")
    for m_i, method in enumerate(methods):
        field = rng.choice(fields)
        other = rng.choice(fields)
        lit = rng.choice(["0", "1", "2", "10", "32"])
        s = rng.choice(STRINGS)
        lines.append(f"    public int {method}(int value) {{")
        body_start = len(lines)
        body = rng.choice(
            [
                [
                    f"        if (value > {lit}) {{",
                    f"            {field} += value;",
                    "        }",
                    f"        return {field};",
                ],
                [
                    f"        int next = {field} + value;",
                    f"        if (next >= {other}) {{",
                    f"            next = {other} - 1;",
                    "        }",
                    f"        {field} = next;",
                    "        return next;",
                ],
                [
                    f"        {field} = Math.max({lit}, value);",
                    f"        this.state = \"{s}\";",
                    f"        return {field} * {rng.choice(['2', '3', '4'])};",
                ],
                [
                    f"        for (int i = 0; i < value; i++) {{",
                    f"            {field} += i;",
                    "        }",
                    f"        return {field} - {lit};",
                ],
            ]
        )
        lines.extend(body)
        # editable: every plain statement line of the body
        sites.extend(
            i
            for i in range(body_start, len(lines))
            if lines[i].strip() not in ("}", "{") and not lines[i].strip().startswith("//")
        )
        lines.append("    }")
        if m_i != len(methods) - 1:
            lines.append("")
    lines.append("}")
    return lines, sites, {"cls": cls, "fields": fields, "methods": methods}


def mutate_line(rng: random.Random, line: str) -> list[str]:
    """One edited replacement for a code line (sometimes 0 or 3 lines)."""
    indent = line[: len(line) - len(line.lstrip())]
    stripped = line.strip()
    roll = rng.random()
    swaps = [(" > ", " >= "), (" >= ", " > "), (" += ", " -= "), (" + ", " - "), (" * ", " + ")]
    if roll < 0.25:
        for a, b in swaps:
            if a in line:
                return [line.replace(a, b, 1)]
        roll = 0.5
    if roll < 0.45:
        digits = [w for w in stripped.replace(";", " ").split() if w.lstrip("-").isdigit()]
        if digits:
            target = rng.choice(digits)
            bumped = str(int(target) + rng.choice([1, 2, 7, -1]))
            return [indent + stripped.replace(target, bumped, 1)]
        roll = 0.6
    if roll < 0.6 and stripped.endswith(";") and not stripped.startswith("return"):
        return []  # drop the statement
    if roll < 0.8 and stripped.endswith(";"):
        guard = rng.choice(["value != 0", "value > 0", "ready"])
        return [
            indent + f"if ({guard}) {{",
            indent + "    " + stripped,
            indent + "}",
        ]
    if "private int" in line:
        return [line.replace("private int", "private long", 1)]
    return [indent + stripped.replace(";", " + 1;", 1) if stripped.endswith(";") else line + " // moved"]


def make_record(rng: random.Random, rec_id: str) -> dict:
    old_lines, sites, names = make_program(rng)
    n_edits = rng.choice([1, 1, 2, 2, 2, 3, 3, 4, 5])
    n_edits = min(n_edits, len(sites))
    chosen = sorted(rng.sample(sites, n_edits), reverse=True)
    new_lines = list(old_lines)
    for idx in chosen:
        new_lines[idx : idx + 1] = mutate_line(rng, new_lines[idx])

    def code_only(lines: list[str]) -> str:
        return " ".join(" ".join(ln.split("//")[0].split()) for ln in lines)

    if code_only(new_lines) == code_only(old_lines):
        # Comment-only or no-op mutations: force a real edit on a field.
        for i, line in enumerate(new_lines):
            if "private int" in line:
                new_lines[i] = line.replace("int", "long", 1)
                break

    record = {
        "id": rec_id,
        "old": "\n".join(old_lines) + "\n",
        "new": "\n".join(new_lines) + "\n",
    }
    if rng.random() < 0.65:
        record["nl"] = rng.choice(MESSAGES).format(
            m=rng.choice(names["methods"]), n=rng.choice(names["fields"])
        )
    elif rng.random() < 0.1:
        record["nl"] = None
    if rng.random() < 0.9:
        record["lang"] = "java"
    elif rng.random() < 0.5:
        record["lang"] = "generic"
    return record


def main() -> None:
    rng = random.Random(SEED)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(N_RECORDS):
            fh.write(json.dumps(make_record(rng, f"c{i:04d}"), ensure_ascii=False) + "\n")
    print(f"wrote {N_RECORDS} records to {OUT}")


if __name__ == "__main__":
    main()
