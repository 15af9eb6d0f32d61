"""Whitespace-token vocabulary with a fixed block of reserved ids.

The reserved tokens occupy ids 0..109 in a frozen order (pad, bos, eos,
unk, the two separators, the four task tags, then [MASK0]..[MASK99]),
so checkpoints and corpora agree on special ids regardless of corpus
content. Corpus tokens follow, most frequent first, ties broken
alphabetically; tokens beyond the size cap encode to unk.
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

PAD = "[PAD]"
BOS = "[BOS]"
EOS = "[EOS]"
UNK = "[UNK]"

SPECIAL_TOKENS: tuple[str, ...] = (
    PAD,
    BOS,
    EOS,
    UNK,
    "[CLS]",
    "[SEP]",
    "[KSM]",
    "[RM]",
    "[DAE]",
    "[EDR]",
    *[f"[MASK{i}]" for i in range(100)],
)

TASK_TAGS = ("[KSM]", "[RM]", "[DAE]", "[EDR]")


class Vocab:
    def __init__(self, tokens: list[str]):
        self.id_to_token = list(SPECIAL_TOKENS) + tokens
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate token in vocabulary")
        self.pad_id = self.token_to_id[PAD]
        self.bos_id = self.token_to_id[BOS]
        self.eos_id = self.token_to_id[EOS]
        self.unk_id = self.token_to_id[UNK]

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.token_to_id.get(t, self.unk_id) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.id_to_token[i] for i in ids]


def build_vocab(corpus_path: str | Path, cap: int = 4096) -> Vocab:
    """Vocabulary over the whitespace tokens of a samples file.

    `cap` bounds the total size including the reserved block; the
    rarest corpus tokens fall off first and encode to unk.
    """
    counts: Counter[str] = Counter()
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            sample = json.loads(line)
            counts.update(sample["input"].split())
            counts.update(sample["target"].split())
    for special in SPECIAL_TOKENS:
        counts.pop(special, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    room = max(0, cap - len(SPECIAL_TOKENS))
    return Vocab([token for token, _ in ranked[:room]])
