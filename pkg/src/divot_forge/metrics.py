"""Evaluation metrics for code edit generation.

All metrics tokenize by whitespace. `exact_match` can first normalize
both sides (comments stripped, whitespace collapsed, lowercased);
`codebleu` here is the partial form: smoothed BLEU plus keyword-weighted
BLEU, with the syntax/dataflow component weights redistributed
proportionally and reported as absent.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .lexer import GENERIC, LanguageProfile, normalize_for_match

NGRAM_ORDER = 4
KEYWORD_WEIGHT = 4
CODEBLEU_WEIGHTS = (0.25, 0.25, 0.25, 0.25)


class LengthMismatchError(ValueError):
    """Prediction/reference/source files disagree on line count."""


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def exact_match(
    candidate: str,
    reference: str,
    normalize: bool = False,
    profile: LanguageProfile = GENERIC,
) -> float:
    if normalize:
        candidate = normalize_for_match(candidate, profile)
        reference = normalize_for_match(reference, profile)
    return 1.0 if candidate == reference else 0.0


def _precision_counts(
    cand: Sequence[str], ref: Sequence[str], weight=None
) -> list[tuple[float, float]]:
    """(match, total) per n-gram order, optionally weighted per n-gram."""
    out = []
    for n in range(1, NGRAM_ORDER + 1):
        cand_grams = _ngrams(cand, n)
        ref_grams = _ngrams(ref, n)
        if weight is None:
            match = sum(min(c, ref_grams[g]) for g, c in cand_grams.items())
            total = sum(cand_grams.values())
        else:
            match = sum(min(c, ref_grams[g]) * weight(g) for g, c in cand_grams.items())
            total = sum(c * weight(g) for g, c in cand_grams.items())
        out.append((match, total))
    return out


def _smoothed_bleu(counts: list[tuple[float, float]], cand_len: int, ref_len: int) -> float:
    """Geometric mean of modified precisions with add-one smoothing for
    n >= 2, times the brevity penalty. Returns a 0..1 fraction."""
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n, (match, total) in enumerate(counts, 1):
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1.0) / (total + 1.0)
        log_sum += math.log(p)
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / max(cand_len, 1))
    return bp * math.exp(log_sum / NGRAM_ORDER)


def bleu4(candidate: str, reference: str) -> float:
    """Sentence-level smoothed BLEU-4, scaled 0..100."""
    cand = candidate.split()
    ref = reference.split()
    return 100.0 * _smoothed_bleu(_precision_counts(cand, ref), len(cand), len(ref))


@dataclass(frozen=True)
class CodeBleuResult:
    score: float
    components: dict = field(compare=False)

    def to_dict(self) -> dict:
        return {"score": self.score, "components": dict(self.components)}


def codebleu(
    candidate: str,
    reference: str,
    profile: LanguageProfile = GENERIC,
    weights: tuple[float, float, float, float] = CODEBLEU_WEIGHTS,
    keyword_weight: int = KEYWORD_WEIGHT,
) -> CodeBleuResult:
    """Partial CodeBLEU: bleu and keyword-weighted bleu only.

    The syntax/dataflow components are unavailable without parsers;
    their weights are redistributed proportionally over the two
    available components, and both are reported as None.
    """
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    cand = candidate.split()
    ref = reference.split()

    def kw_weight(gram: tuple[str, ...]) -> int:
        return keyword_weight if any(t in profile.keywords for t in gram) else 1

    plain = _smoothed_bleu(_precision_counts(cand, ref), len(cand), len(ref))
    weighted = _smoothed_bleu(
        _precision_counts(cand, ref, weight=kw_weight), len(cand), len(ref)
    )
    a, b, c, d = weights
    components = {
        "bleu": plain,
        "weighted_bleu": weighted,
        "syntax_match": None,
        "dataflow_match": None,
    }
    if a + b == 0:
        return CodeBleuResult(0.0, components)
    score = (a * plain + b * weighted) * (a + b + c + d) / (a + b)
    return CodeBleuResult(score, components)


@dataclass(frozen=True)
class SariResult:
    score: float
    add_f1: float
    keep_f1: float
    del_precision: float

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "add_f1": self.add_f1,
            "keep_f1": self.keep_f1,
            "del_precision": self.del_precision,
        }


def _ratio(num: float, den: float) -> float:
    """num/den with the 0/0 convention: nothing expected, nothing done -> 1."""
    if den == 0:
        return 1.0
    return num / den


def _f1(p: float, r: float) -> float:
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def sari(source: str, candidate: str, reference: str) -> SariResult:
    """Edit-aware score over n-gram orders 1..4, returned as 0..1.

    Per order: F1 of added n-grams (relative to the source), F1 of kept
    n-grams, precision of deleted n-grams; the order score is their
    mean, and the final score the mean over orders.
    """
    src = source.split()
    cand = candidate.split()
    ref = reference.split()
    adds, keeps, dels = [], [], []
    for n in range(1, NGRAM_ORDER + 1):
        s = _ngrams(src, n)
        c = _ngrams(cand, n)
        r = _ngrams(ref, n)

        cand_new = c - s
        ref_new = r - s
        hit = sum((cand_new & ref_new).values())
        add_f1 = _f1(
            _ratio(hit, sum(cand_new.values())), _ratio(hit, sum(ref_new.values()))
        )

        cand_kept = c & s
        ref_kept = r & s
        hit = sum((cand_kept & ref_kept).values())
        keep_f1 = _f1(
            _ratio(hit, sum(cand_kept.values())), _ratio(hit, sum(ref_kept.values()))
        )

        cand_del = s - c
        ref_del = s - r
        hit = sum((cand_del & ref_del).values())
        del_p = _ratio(hit, sum(cand_del.values()))

        adds.append(add_f1)
        keeps.append(keep_f1)
        dels.append(del_p)

    add_f1 = sum(adds) / NGRAM_ORDER
    keep_f1 = sum(keeps) / NGRAM_ORDER
    del_p = sum(dels) / NGRAM_ORDER
    return SariResult((add_f1 + keep_f1 + del_p) / 3.0, add_f1, keep_f1, del_p)


@dataclass
class ScoreReport:
    n_examples: int
    em: float | None = None
    bleu4: float | None = None
    corpus_bleu4: float | None = None
    sari: dict | None = None
    codebleu: dict | None = None

    def to_dict(self) -> dict:
        out: dict = {"n_examples": self.n_examples}
        for name in ("em", "bleu4", "corpus_bleu4", "sari", "codebleu"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


ALL_METRICS = ("em", "bleu", "sari", "codebleu")


def _read_lines(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def score_files(
    pred_path: str | Path,
    gold_path: str | Path,
    src_path: str | Path | None = None,
    metrics: Sequence[str] = ALL_METRICS,
    normalize: bool = False,
    profile: LanguageProfile = GENERIC,
    corpus_bleu: bool = False,
) -> ScoreReport:
    """Line-aligned scoring of a predictions file against a gold file.

    sari needs `src_path` (the pre-edit source for each line). Sentence
    BLEU is averaged over lines; `corpus_bleu` adds a corpus-level
    aggregate (counts pooled before the geometric mean).
    """
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    preds = _read_lines(pred_path)
    golds = _read_lines(gold_path)
    if len(preds) != len(golds):
        raise LengthMismatchError(
            f"{pred_path} has {len(preds)} lines, {gold_path} has {len(golds)}"
        )
    srcs: list[str] | None = None
    if "sari" in metrics:
        if src_path is None:
            raise ValueError("sari requires a source file")
        srcs = _read_lines(src_path)
        if len(srcs) != len(preds):
            raise LengthMismatchError(
                f"{src_path} has {len(srcs)} lines, expected {len(preds)}"
            )
    if not preds:
        raise ValueError("nothing to score: empty prediction file")

    report = ScoreReport(n_examples=len(preds))
    if "em" in metrics:
        report.em = sum(
            exact_match(p, g, normalize=normalize, profile=profile)
            for p, g in zip(preds, golds)
        ) / len(preds)
    if "bleu" in metrics:
        report.bleu4 = sum(bleu4(p, g) for p, g in zip(preds, golds)) / len(preds)
        if corpus_bleu:
            totals = [[0.0, 0.0] for _ in range(NGRAM_ORDER)]
            cand_len = 0
            ref_len = 0
            for p, g in zip(preds, golds):
                cand, ref = p.split(), g.split()
                cand_len += len(cand)
                ref_len += len(ref)
                for i, (match, total) in enumerate(_precision_counts(cand, ref)):
                    totals[i][0] += match
                    totals[i][1] += total
            report.corpus_bleu4 = 100.0 * _smoothed_bleu(
                [(m, t) for m, t in totals], cand_len, ref_len
            )
    if "sari" in metrics and srcs is not None:
        results = [sari(s, p, g) for s, p, g in zip(srcs, preds, golds)]
        report.sari = {
            "score": sum(r.score for r in results) / len(results),
            "add_f1": sum(r.add_f1 for r in results) / len(results),
            "keep_f1": sum(r.keep_f1 for r in results) / len(results),
            "del_precision": sum(r.del_precision for r in results) / len(results),
        }
    if "codebleu" in metrics:
        results = [codebleu(p, g, profile) for p, g in zip(preds, golds)]
        report.codebleu = {
            "score": sum(r.score for r in results) / len(results),
            "components": {
                "bleu": sum(r.components["bleu"] for r in results) / len(results),
                "weighted_bleu": sum(r.components["weighted_bleu"] for r in results)
                / len(results),
                "syntax_match": None,
                "dataflow_match": None,
            },
        }
    return report
