"""Minimal token edit scripts and line-level change hunks.

Token scripts come from a Myers O(ND) search over token sequences and
are minimal in insert+delete cost. Tie-breaking is fixed so output is
deterministic: at equal cost a Delete run precedes an Insert run, and
common runs are taken as early as possible.

Line hunks run the same engine over line sequences and then group
changed regions, merging groups separated by fewer than `gap` unchanged
lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class OpKind(Enum):
    KEEP = "keep"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class EditOp:
    kind: OpKind
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]
    old_len: int
    new_len: int

    @property
    def cost(self) -> int:
        """Number of inserted plus deleted tokens."""
        return sum(len(op.tokens) for op in self.ops if op.kind is not OpKind.KEEP)

    def to_dict(self) -> dict:
        return {
            "ops": [{"kind": op.kind.value, "tokens": list(op.tokens)} for op in self.ops],
            "old_len": self.old_len,
            "new_len": self.new_len,
            "cost": self.cost,
        }


def _full_replace(a: tuple[str, ...], b: tuple[str, ...]) -> EditScript:
    ops = []
    if a:
        ops.append(EditOp(OpKind.DELETE, a))
    if b:
        ops.append(EditOp(OpKind.INSERT, b))
    return EditScript(tuple(ops), len(a), len(b))


def token_diff(
    old: Sequence[str],
    new: Sequence[str],
    max_cost: int | None = None,
) -> EditScript:
    """Minimal edit script turning `old` into `new`.

    `max_cost` is a band limit: when the minimal cost would exceed it,
    the (valid, non-minimal) full delete+insert script is returned
    instead of spending O(ND) on a near-total rewrite. None means no
    limit, and the result is always minimal.
    """
    a = tuple(old)
    b = tuple(new)
    n, m = len(a), len(b)

    # Trace nodes are (parent, kind, index, count) with kind in K/D/I;
    # sharing parents keeps memory at one node per explored state.
    def advance(x: int, y: int, trace):
        run = 0
        while x < n and y < m and a[x] == b[y]:
            x += 1
            y += 1
            run += 1
        if run:
            trace = (trace, "K", x - run, run)
        return x, trace

    x, trace = advance(0, 0, None)
    if x == n and x == m:
        return _materialize(trace, a, b)

    frontier: dict[int, tuple[int, tuple | None]] = {0: (x, trace)}
    d = 0
    while True:
        d += 1
        if max_cost is not None and d > max_cost:
            return _full_replace(a, b)
        next_frontier: dict[int, tuple[int, tuple | None]] = {}
        for k in range(-d, d + 1, 2):
            up = frontier.get(k + 1)
            left = frontier.get(k - 1)
            can_down = up is not None and up[0] - (k + 1) < m
            can_right = left is not None and left[0] < n
            if not can_down and not can_right:
                continue
            # On ties take the Delete branch so deletions come first.
            if can_down and (not can_right or left[0] < up[0]):
                x_prev, tr = up
                x = x_prev
                y = x - k
                tr = (tr, "I", y - 1, 1)
            else:
                x_prev, tr = left
                x = x_prev + 1
                y = x - k
                tr = (tr, "D", x - 1, 1)
            x, tr = advance(x, y, tr)
            next_frontier[k] = (x, tr)
            if x == n and x - k == m:
                return _materialize(tr, a, b)
        frontier = next_frontier


def _materialize(trace, a: tuple[str, ...], b: tuple[str, ...]) -> EditScript:
    steps = []
    node = trace
    while node is not None:
        node, kind, idx, count = node
        steps.append((kind, idx, count))
    steps.reverse()

    ops: list[EditOp] = []
    for kind, idx, count in steps:
        if kind == "K":
            tokens = a[idx : idx + count]
            op_kind = OpKind.KEEP
        elif kind == "D":
            tokens = a[idx : idx + count]
            op_kind = OpKind.DELETE
        else:
            tokens = b[idx : idx + count]
            op_kind = OpKind.INSERT
        if ops and ops[-1].kind is op_kind:
            ops[-1] = EditOp(op_kind, ops[-1].tokens + tokens)
        else:
            ops.append(EditOp(op_kind, tokens))
    return EditScript(tuple(ops), len(a), len(b))


def apply_script(old: Sequence[str], script: EditScript) -> list[str]:
    """Replay `script` against `old`; raises ValueError on any mismatch."""
    if len(old) != script.old_len:
        raise ValueError(f"script was built for {script.old_len} tokens, got {len(old)}")
    out: list[str] = []
    pos = 0
    for op in script.ops:
        if op.kind is OpKind.INSERT:
            out.extend(op.tokens)
            continue
        chunk = tuple(old[pos : pos + len(op.tokens)])
        if chunk != op.tokens:
            raise ValueError(f"script does not match input at token {pos}")
        pos += len(op.tokens)
        if op.kind is OpKind.KEEP:
            out.extend(op.tokens)
    if pos != len(old):
        raise ValueError(f"script consumed {pos} of {len(old)} tokens")
    return out


def keep_positions(script: EditScript) -> list[int]:
    """Old-sequence indices of every token the script keeps."""
    positions: list[int] = []
    pos = 0
    for op in script.ops:
        if op.kind is OpKind.KEEP:
            positions.extend(range(pos, pos + len(op.tokens)))
        if op.kind is not OpKind.INSERT:
            pos += len(op.tokens)
    return positions


def normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def split_lines(text: str) -> list[str]:
    """Newline-normalized line list; exact inverse of "\\n".join."""
    return normalize_newlines(text).split("\n")


@dataclass(frozen=True)
class Hunk:
    """One contiguous replacement: old lines [old_start, old_end) become
    `replacement`. Line numbers are 0-based over the normalized old text;
    an empty old range is a pure insertion at that line."""

    index: int
    old_start: int
    old_end: int
    new_start: int
    new_end: int
    replacement: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "old_lines": [self.old_start, self.old_end],
            "new_lines": [self.new_start, self.new_end],
            "replacement": list(self.replacement),
        }


def line_diff_hunks(old_text: str, new_text: str, gap: int = 3) -> list[Hunk]:
    """Changed-line groups of the old→new line diff, merged by `gap`.

    Groups separated by at least `gap` unchanged lines stay distinct;
    anything closer merges into one hunk (the unchanged lines in between
    ride along in the replacement).
    """
    if gap < 1:
        raise ValueError("gap must be >= 1")
    old_lines = split_lines(old_text)
    new_lines = split_lines(new_text)
    script = token_diff(old_lines, new_lines)

    # Collect maximal changed regions as [old_start, old_end) x [new_start, new_end).
    regions: list[list[int]] = []
    old_pos = 0
    new_pos = 0
    open_region: list[int] | None = None
    for op in script.ops:
        if op.kind is OpKind.KEEP:
            open_region = None
            old_pos += len(op.tokens)
            new_pos += len(op.tokens)
            continue
        if open_region is None:
            open_region = [old_pos, old_pos, new_pos, new_pos]
            regions.append(open_region)
        if op.kind is OpKind.DELETE:
            old_pos += len(op.tokens)
            open_region[1] = old_pos
        else:
            new_pos += len(op.tokens)
            open_region[3] = new_pos

    merged: list[list[int]] = []
    for region in regions:
        if merged and region[0] - merged[-1][1] < gap:
            merged[-1][1] = region[1]
            merged[-1][3] = region[3]
        else:
            merged.append(region)

    return [
        Hunk(
            index=i + 1,
            old_start=os_,
            old_end=oe,
            new_start=ns,
            new_end=ne,
            replacement=tuple(new_lines[ns:ne]),
        )
        for i, (os_, oe, ns, ne) in enumerate(merged)
    ]


def apply_hunks(old_text: str, hunks: Sequence[Hunk]) -> str:
    """Apply any subset of hunks (old-line coordinates) to the old text."""
    lines = split_lines(old_text)
    for hunk in sorted(hunks, key=lambda h: h.old_start, reverse=True):
        lines[hunk.old_start : hunk.old_end] = hunk.replacement
    return "\n".join(lines)
