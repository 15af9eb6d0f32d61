"""Metric tests. BLEU is checked against an independent reference
implementation; SARI against hand-computed Counter arithmetic."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_bleu4, write_jsonl
from divot_forge.lexer import GENERIC, JAVA
from divot_forge.metrics import (
    LengthMismatchError,
    ScoreReport,
    bleu4,
    codebleu,
    exact_match,
    sari,
    score_files,
)

sentences = st.lists(st.sampled_from("abcdef"), max_size=10).map(" ".join)


# --- exact match --------------------------------------------------------


def test_exact_match_literal():
    assert exact_match("x = 1 ;", "x = 1 ;") == 1.0
    assert exact_match("x = 1 ;", "x = 2 ;") == 0.0
    assert exact_match("x = 1 ;", "x  = 1 ;") == 0.0  # literal mode is strict


def test_exact_match_normalized():
    assert exact_match("X = 1 // note", "x  =\t1", normalize=True) == 1.0
    assert exact_match("a /* c */ b", "A B", normalize=True) == 1.0
    assert exact_match("a b", "a c", normalize=True) == 0.0


# --- bleu ---------------------------------------------------------------


def test_bleu_frozen_values():
    assert bleu4("a b c d", "a b c e") == pytest.approx(65.80370064762462, abs=1e-12)
    assert bleu4("a b c", "a b c d e") == pytest.approx(51.3417119032592, abs=1e-12)


def test_bleu_edges():
    assert bleu4("a b c d e", "a b c d e") == pytest.approx(100.0)
    assert bleu4("a b", "c d") == 0.0  # no unigram overlap
    assert bleu4("", "a b") == 0.0
    assert bleu4("a", "a") == pytest.approx(100.0)  # short but identical


def test_bleu_matches_reference_on_random_pairs():
    rng = random.Random(13)
    vocab = list("abcdefgh")
    for _ in range(200):
        cand = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        ref = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12)))
        assert bleu4(cand, ref) == pytest.approx(reference_bleu4(cand, ref), abs=1e-9)


@settings(max_examples=200)
@given(sentences, sentences)
def test_bleu_stays_in_range(cand, ref):
    score = bleu4(cand, ref)
    assert 0.0 <= score <= 100.0
    assert score == pytest.approx(reference_bleu4(cand, ref), abs=1e-9)


# --- codebleu -----------------------------------------------------------


def test_codebleu_single_weight_reduces_to_bleu():
    for cand, ref in [("a b c d", "a b c e"), ("x + y ;", "x - y ;")]:
        part = codebleu(cand, ref, GENERIC, weights=(1, 0, 0, 0))
        assert part.score == pytest.approx(bleu4(cand, ref) / 100.0, abs=1e-12)


def test_codebleu_keyword_weighting_punishes_keyword_misses():
    result = codebleu("break a + b ;", "return a + b ;", JAVA)
    assert result.components["bleu"] == pytest.approx(0.7521206186172787, abs=1e-12)
    assert result.components["weighted_bleu"] == pytest.approx(
        0.43472087194499137, abs=1e-12
    )
    assert result.components["weighted_bleu"] < result.components["bleu"]
    # default weights: mean of the two available components
    expect = (0.25 * 0.7521206186172787 + 0.25 * 0.43472087194499137) * (1.0 / 0.5)
    assert result.score == pytest.approx(expect, abs=1e-12)


def test_codebleu_keyword_hits_score_like_plain_when_keywords_agree():
    result = codebleu("return a ;", "return a ;", JAVA)
    assert result.score == pytest.approx(1.0)
    assert result.components["syntax_match"] is None
    assert result.components["dataflow_match"] is None


def test_codebleu_zero_weights_and_validation():
    assert codebleu("a", "a", GENERIC, weights=(0, 0, 0, 0)).score == 0.0
    assert codebleu("a", "a", GENERIC, weights=(0, 0, 1, 1)).score == 0.0
    with pytest.raises(ValueError):
        codebleu("a", "a", GENERIC, weights=(-1, 1, 1, 1))


def test_codebleu_identity_is_one():
    assert codebleu("for i in range ;", "for i in range ;", GENERIC).score == pytest.approx(1.0)


# --- sari ---------------------------------------------------------------


def test_sari_unchanged_candidate_frozen():
    result = sari("a b c", "a b c", "a d c")
    assert result.score == pytest.approx(17 / 30, abs=1e-12)
    assert result.score == pytest.approx(0.5666666666666667, abs=1e-12)
    assert result.add_f1 == pytest.approx(0.25)
    assert result.keep_f1 == pytest.approx(0.45)
    assert result.del_precision == pytest.approx(1.0)


def test_sari_perfect_edit_is_one():
    assert sari("a b c", "a d c", "a d c").score == pytest.approx(1.0)
    assert sari("x", "x", "x").score == pytest.approx(1.0)
    assert sari("p q r s", "p q r s", "p q r s").score == pytest.approx(1.0)


def test_sari_score_is_mean_of_components():
    result = sari("a b c d", "a b x d", "a y c d")
    assert result.score == pytest.approx(
        (result.add_f1 + result.keep_f1 + result.del_precision) / 3.0
    )


@settings(max_examples=200)
@given(sentences, sentences, sentences)
def test_sari_components_stay_in_range(src, cand, ref):
    result = sari(src, cand, ref)
    for value in (result.score, result.add_f1, result.keep_f1, result.del_precision):
        assert 0.0 <= value <= 1.0


@settings(max_examples=100)
@given(sentences, sentences)
def test_sari_identity_edit(src, ref):
    assert sari(src, ref, ref).score == pytest.approx(1.0)


# --- score_files --------------------------------------------------------


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def test_score_files_full_report(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    src = tmp_path / "src.txt"
    write_lines(pred, ["a b c d", "x y ;"])
    write_lines(gold, ["a b c e", "x y ;"])
    write_lines(src, ["a b c f", "x z ;"])
    report = score_files(pred, gold, src_path=src, corpus_bleu=True)
    assert report.n_examples == 2
    assert report.em == pytest.approx(0.5)
    want_mean = (bleu4("a b c d", "a b c e") + bleu4("x y ;", "x y ;")) / 2
    assert report.bleu4 == pytest.approx(want_mean)
    assert report.corpus_bleu4 is not None
    assert 0.0 <= report.corpus_bleu4 <= 100.0
    assert set(report.sari) == {"score", "add_f1", "keep_f1", "del_precision"}
    assert report.codebleu["components"]["syntax_match"] is None
    d = report.to_dict()
    assert d["n_examples"] == 2
    assert set(d) == {"n_examples", "em", "bleu4", "corpus_bleu4", "sari", "codebleu"}


def test_score_files_corpus_bleu_pools_counts(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    write_lines(pred, ["a b c d", "p"])
    write_lines(gold, ["a b c e", "q"])
    report = score_files(pred, gold, metrics=("bleu",), corpus_bleu=True)
    # pooled counts: n1 3/5, n2 (2+1)/(3+1), n3 (1+1)/(2+1), n4 (0+1)/(1+1)
    import math

    want = 100.0 * math.exp(
        (math.log(3 / 5) + math.log(3 / 4) + math.log(2 / 3) + math.log(1 / 2)) / 4
    )
    assert report.corpus_bleu4 == pytest.approx(want, abs=1e-9)
    # pooling is not averaging
    assert report.corpus_bleu4 != pytest.approx(report.bleu4)


def test_score_files_length_mismatch(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    write_lines(pred, ["a", "b"])
    write_lines(gold, ["a"])
    with pytest.raises(LengthMismatchError):
        score_files(pred, gold, metrics=("em",))


def test_score_files_sari_needs_src(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    write_lines(pred, ["a"])
    write_lines(gold, ["a"])
    with pytest.raises(ValueError):
        score_files(pred, gold, metrics=("sari",))


def test_score_files_rejects_empty_and_unknown(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    pred.write_text("", encoding="utf-8")
    gold.write_text("", encoding="utf-8")
    with pytest.raises(ValueError):
        score_files(pred, gold, metrics=("em",))
    write_lines(pred, ["a"])
    write_lines(gold, ["a"])
    with pytest.raises(ValueError):
        score_files(pred, gold, metrics=("em", "rouge"))


def test_score_files_normalize_flag(tmp_path):
    pred = tmp_path / "pred.txt"
    gold = tmp_path / "gold.txt"
    write_lines(pred, ["X = 1"])
    write_lines(gold, ["x  = 1"])
    strict = score_files(pred, gold, metrics=("em",))
    loose = score_files(pred, gold, metrics=("em",), normalize=True)
    assert strict.em == 0.0
    assert loose.em == 1.0
