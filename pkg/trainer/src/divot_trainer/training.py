"""Training loop over a divot-forge samples file.

The objective is next-token cross-entropy summed over every sample
regardless of its task tag, so the reported loss is the plain sum of
the four per-task partial losses (loss_breakdown exposes the split).
Batch order is seeded and the model init is seeded, so a config seed
pins the whole loss history.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import Tensor, nn

from .model import DecodeResult, Seq2Seq, greedy_decode
from .vocab import TASK_TAGS, Vocab, build_vocab

WIRE_TASKS = ("ksm", "rm", "dae", "edr")


class ConfigError(ValueError):
    """A config bound does not fit the corpus or is not positive."""


class EmptyCorpusError(ValueError):
    """The samples file contains no samples."""


@dataclass(frozen=True)
class TrainerConfig:
    vocab_cap: int = 4096
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2
    ff_dim: int = 256
    max_input_len: int = 64
    max_target_len: int = 32
    batch_size: int = 32
    epochs: int = 40
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in (
            "vocab_cap",
            "d_model",
            "n_heads",
            "n_layers",
            "ff_dim",
            "max_input_len",
            "max_target_len",
            "batch_size",
            "epochs",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.lr < 0:
            raise ConfigError("lr must be non-negative")


@dataclass(frozen=True)
class Sample:
    task: str  # wire name: ksm | rm | dae | edr
    input_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]

    @property
    def tag(self) -> str:
        return f"[{self.task.upper()}]"


@dataclass
class Batch:
    """One padded batch. Tags are per-row task markers from TASK_TAGS;
    all id matrices are (B, L) with pad masks True at padding."""

    tags: list[str]
    input_ids: Tensor
    input_pad: Tensor
    target_in: Tensor
    target_out: Tensor
    target_pad: Tensor


def load_samples(corpus_path: str | Path) -> list[Sample]:
    samples: list[Sample] = []
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            task = obj["task"]
            if task not in WIRE_TASKS:
                raise ValueError(f"{corpus_path}:{lineno}: unknown task {task!r}")
            samples.append(
                Sample(
                    task=task,
                    input_tokens=tuple(obj["input"].split()),
                    target_tokens=tuple(obj["target"].split()),
                )
            )
    if not samples:
        raise EmptyCorpusError(f"no samples in {corpus_path}")
    return samples


def check_lengths(samples: list[Sample], cfg: TrainerConfig) -> None:
    longest_in = max(len(s.input_tokens) for s in samples)
    longest_tgt = max(len(s.target_tokens) for s in samples)
    if longest_in > cfg.max_input_len:
        raise ConfigError(
            f"max_input_len {cfg.max_input_len} < longest sample input {longest_in}"
        )
    if longest_tgt + 1 > cfg.max_target_len:  # +1 for bos/eos shift
        raise ConfigError(
            f"max_target_len {cfg.max_target_len} < longest sample target "
            f"{longest_tgt} plus its end marker"
        )


def make_batch(samples: list[Sample], vocab: Vocab) -> Batch:
    pad = vocab.pad_id
    in_width = max(len(s.input_tokens) for s in samples)
    tgt_width = max(len(s.target_tokens) for s in samples) + 1
    input_ids, target_in, target_out = [], [], []
    for s in samples:
        ids = vocab.encode(list(s.input_tokens))
        input_ids.append(ids + [pad] * (in_width - len(ids)))
        tgt = vocab.encode(list(s.target_tokens))
        fill = [pad] * (tgt_width - len(tgt) - 1)
        target_in.append([vocab.bos_id] + tgt + fill)
        target_out.append(tgt + [vocab.eos_id] + fill)
    input_ids = torch.tensor(input_ids, dtype=torch.long)
    target_in = torch.tensor(target_in, dtype=torch.long)
    target_out = torch.tensor(target_out, dtype=torch.long)
    return Batch(
        tags=[s.tag for s in samples],
        input_ids=input_ids,
        input_pad=input_ids.eq(pad),
        target_in=target_in,
        target_pad=target_in.eq(pad),
        target_out=target_out,
    )


def batch_sum_loss(model: Seq2Seq, batch: Batch, pad_id: int) -> Tensor:
    logits = model(batch.input_ids, batch.input_pad, batch.target_in, batch.target_pad)
    return nn.functional.cross_entropy(
        logits.reshape(-1, logits.shape[-1]),
        batch.target_out.reshape(-1),
        ignore_index=pad_id,
        reduction="sum",
    )


def loss_breakdown(
    model: Seq2Seq, batch: Batch, pad_id: int
) -> tuple[float, dict[str, float]]:
    """(total summed loss, per-task partial losses) on one batch.

    The partials are computed on disjoint row subsets of the same
    forward pass, so they sum to the total. The audit runs in double
    precision so the additive identity is not blurred by fp32 sums."""
    model.eval()
    with torch.no_grad():
        logits = model(
            batch.input_ids, batch.input_pad, batch.target_in, batch.target_pad
        ).double()
        total = nn.functional.cross_entropy(
            logits.reshape(-1, logits.shape[-1]),
            batch.target_out.reshape(-1),
            ignore_index=pad_id,
            reduction="sum",
        ).item()
        partials: dict[str, float] = {}
        for tag in TASK_TAGS:
            rows = [i for i, t in enumerate(batch.tags) if t == tag]
            if not rows:
                continue
            idx = torch.tensor(rows, dtype=torch.long)
            partials[tag] = nn.functional.cross_entropy(
                logits[idx].reshape(-1, logits.shape[-1]),
                batch.target_out[idx].reshape(-1),
                ignore_index=pad_id,
                reduction="sum",
            ).item()
    return total, partials


@dataclass
class TrainedModel:
    net: Seq2Seq
    vocab: Vocab
    cfg: TrainerConfig


@dataclass
class TrainResult:
    model: TrainedModel
    history: list[float] = field(default_factory=list)


def train(corpus_path: str | Path, cfg: TrainerConfig | None = None) -> TrainResult:
    """Train on a samples file; history holds per-epoch mean token loss.

    The per-epoch number is (summed cross-entropy over the epoch) /
    (target tokens in the epoch), which no batch ordering can change.
    """
    cfg = cfg if cfg is not None else TrainerConfig()
    samples = load_samples(corpus_path)
    check_lengths(samples, cfg)
    vocab = build_vocab(corpus_path, cfg.vocab_cap)

    torch.manual_seed(cfg.seed)
    net = Seq2Seq(
        vocab_size=len(vocab),
        pad_id=vocab.pad_id,
        d_model=cfg.d_model,
        n_heads=cfg.n_heads,
        n_layers=cfg.n_layers,
        ff_dim=cfg.ff_dim,
        max_len=max(cfg.max_input_len, cfg.max_target_len),
    )
    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.lr)
    order_rng = random.Random(cfg.seed)

    result = TrainResult(model=TrainedModel(net=net, vocab=vocab, cfg=cfg))
    indices = list(range(len(samples)))
    for _ in range(cfg.epochs):
        net.train()
        order_rng.shuffle(indices)
        epoch_loss = 0.0
        epoch_tokens = 0
        for start in range(0, len(indices), cfg.batch_size):
            rows = [samples[i] for i in indices[start : start + cfg.batch_size]]
            batch = make_batch(rows, vocab)
            loss = batch_sum_loss(net, batch, vocab.pad_id)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item()
            epoch_tokens += int(batch.target_out.ne(vocab.pad_id).sum().item())
        result.history.append(epoch_loss / epoch_tokens)
    return result


def decode_traced(model: TrainedModel, input_text: str) -> DecodeResult:
    """Greedy generation with the decoder step count attached."""
    tokens = input_text.split()
    if len(tokens) > model.cfg.max_input_len:
        raise ConfigError(
            f"input has {len(tokens)} tokens, max_input_len is {model.cfg.max_input_len}"
        )
    ids, steps = greedy_decode(
        model.net,
        model.vocab.encode(tokens),
        bos_id=model.vocab.bos_id,
        eos_id=model.vocab.eos_id,
        max_target_len=model.cfg.max_target_len,
    )
    content = [i for i in ids if i != model.vocab.eos_id]
    return DecodeResult(
        tokens=model.vocab.decode(content), generated_ids=ids, decoder_steps=steps
    )


def decode(model: TrainedModel, input_text: str) -> str:
    return decode_traced(model, input_text).text


def evaluate_em(model: TrainedModel, corpus_path: str | Path) -> float:
    """Fraction of samples whose greedy decode equals the target exactly."""
    samples = load_samples(corpus_path)
    hits = 0
    for sample in samples:
        if decode(model, " ".join(sample.input_tokens)) == " ".join(
            sample.target_tokens
        ):
            hits += 1
    return hits / len(samples)
