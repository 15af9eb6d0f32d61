"""Acceptance tests for the trainer.

Two gates, each printing one PASS line (run with -s to see them):
  1. Toy end-to-end: on a 64-record synthetic edit corpus built by the
     divot-forge CLI, training reaches train EM >= 0.90 with final
     epoch loss < 0.2 x the first epoch loss, inside 5 minutes of CPU
     wall clock, and greedy decoding performs exactly one decoder
     forward step per generated token on every sample.
  2. Loss additivity: per-task partial losses sum to the batch total
     within 1e-5 on 20 random batches.
"""

from __future__ import annotations

import random
import time

import pytest

from divot_trainer import (
    TASK_TAGS,
    TrainerConfig,
    decode_traced,
    evaluate_em,
    load_samples,
    loss_breakdown,
    make_batch,
    train,
)
from trainer_helpers import build_corpus, memorization_records

TIME_BUDGET_SECONDS = 300.0
EM_FLOOR = 0.90
LOSS_RATIO_CEILING = 0.2
ADDITIVITY_TOLERANCE = 1e-5


@pytest.fixture(scope="module")
def toy_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("trainer-acceptance")
    corpus = build_corpus(tmp, memorization_records(64), "--seed", "0")
    start = time.perf_counter()
    result = train(corpus, TrainerConfig())
    em = evaluate_em(result.model, corpus)
    elapsed = time.perf_counter() - start
    return corpus, result, em, elapsed


def test_toy_end_to_end_memorization_and_single_pass_decoding(toy_run):
    corpus, result, em, elapsed = toy_run
    samples = load_samples(corpus)
    assert len({s.task for s in samples}) == 4

    assert elapsed < TIME_BUDGET_SECONDS
    first, last = result.history[0], result.history[-1]
    assert last < LOSS_RATIO_CEILING * first
    assert em >= EM_FLOOR

    model = result.model
    traced_hits = 0
    for sample in samples:
        trace = decode_traced(model, " ".join(sample.input_tokens))
        assert trace.decoder_steps == len(trace.generated_ids), (
            "decoder must spend exactly one forward step per generated token"
        )
        traced_hits += trace.text == " ".join(sample.target_tokens)
    assert traced_hits / len(samples) == em

    print(
        f"PASS: toy end-to-end: train EM {em:.4f} >= {EM_FLOOR}, "
        f"loss {first:.4f} -> {last:.4f} "
        f"(ratio {last / first:.4f} < {LOSS_RATIO_CEILING}), "
        f"{elapsed:.1f}s < {TIME_BUDGET_SECONDS:.0f}s, "
        f"single-pass decoding on all {len(samples)} samples"
    )


def test_loss_additivity_on_random_batches(toy_run):
    corpus, result, _, _ = toy_run
    model = result.model
    samples = load_samples(corpus)
    rng = random.Random(7)
    worst = 0.0
    for _ in range(20):
        rows = rng.sample(samples, rng.randint(4, 48))
        batch = make_batch(rows, model.vocab)
        total, partials = loss_breakdown(model.net, batch, model.vocab.pad_id)
        assert set(partials) == {tag for tag in batch.tags}
        assert set(partials) <= set(TASK_TAGS)
        deviation = abs(total - sum(partials.values()))
        worst = max(worst, deviation)
        assert deviation <= ADDITIVITY_TOLERANCE
    print(
        f"PASS: loss additivity: max |total - sum(partials)| = {worst:.3e} "
        f"<= {ADDITIVITY_TOLERANCE} over 20 random batches"
    )
