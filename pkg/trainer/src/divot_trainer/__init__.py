"""Toy encoder-decoder trainer for divot-forge sample corpora."""

from .model import DecodeResult, Seq2Seq, greedy_decode
from .training import (
    Batch,
    ConfigError,
    EmptyCorpusError,
    Sample,
    TrainedModel,
    TrainerConfig,
    TrainResult,
    batch_sum_loss,
    check_lengths,
    decode,
    decode_traced,
    evaluate_em,
    load_samples,
    loss_breakdown,
    make_batch,
    train,
)
from .vocab import SPECIAL_TOKENS, TASK_TAGS, Vocab, build_vocab

__version__ = "0.1.0"
