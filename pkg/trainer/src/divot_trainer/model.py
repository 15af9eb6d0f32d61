"""Tiny encoder-decoder transformer with instrumented greedy decoding.

The decoder keeps a step counter: every call that produces one more
token bumps it once, so tests can assert generation is plain
left-to-right autoregression (one decoder pass per emitted token, no
iterative refinement over the whole sequence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import Tensor, nn


class Seq2Seq(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        pad_id: int,
        d_model: int = 128,
        n_heads: int = 4,
        n_layers: int = 2,
        ff_dim: int = 256,
        max_len: int = 256,
    ):
        super().__init__()
        self.pad_id = pad_id
        self.d_model = d_model
        self.max_len = max_len
        self.embed = nn.Embedding(vocab_size, d_model, padding_idx=pad_id)
        self.pos = nn.Embedding(max_len, d_model)
        enc_layer = nn.TransformerEncoderLayer(
            d_model, n_heads, ff_dim, dropout=0.0, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(
            enc_layer, n_layers, enable_nested_tensor=False
        )
        dec_layer = nn.TransformerDecoderLayer(
            d_model, n_heads, ff_dim, dropout=0.0, batch_first=True
        )
        self.decoder = nn.TransformerDecoder(dec_layer, n_layers)
        self.proj = nn.Linear(d_model, vocab_size)
        self.decoder_steps = 0  # instrumentation, see module docstring

    def _embed(self, ids: Tensor) -> Tensor:
        length = ids.shape[1]
        if length > self.max_len:
            raise ValueError(f"sequence length {length} exceeds model max {self.max_len}")
        positions = torch.arange(length, device=ids.device)
        return self.embed(ids) * math.sqrt(self.d_model) + self.pos(positions)

    @staticmethod
    def _causal_mask(length: int, device) -> Tensor:
        return torch.triu(
            torch.ones(length, length, dtype=torch.bool, device=device), diagonal=1
        )

    def encode(self, src_ids: Tensor, src_pad: Tensor) -> Tensor:
        return self.encoder(self._embed(src_ids), src_key_padding_mask=src_pad)

    def forward(
        self,
        src_ids: Tensor,
        src_pad: Tensor,
        tgt_in: Tensor,
        tgt_pad: Tensor,
    ) -> Tensor:
        """Teacher-forced logits over the whole target, (B, Lt, V)."""
        memory = self.encode(src_ids, src_pad)
        out = self.decoder(
            self._embed(tgt_in),
            memory,
            tgt_mask=self._causal_mask(tgt_in.shape[1], tgt_in.device),
            tgt_key_padding_mask=tgt_pad,
            memory_key_padding_mask=src_pad,
        )
        return self.proj(out)

    def decode_logits(self, memory: Tensor, src_pad: Tensor, prefix: Tensor) -> Tensor:
        """Logits for the next token after `prefix`, (B, V). One step."""
        self.decoder_steps += 1
        out = self.decoder(
            self._embed(prefix),
            memory,
            tgt_mask=self._causal_mask(prefix.shape[1], prefix.device),
            memory_key_padding_mask=src_pad,
        )
        return self.proj(out[:, -1])


@dataclass(frozen=True)
class DecodeResult:
    tokens: list[str]  # generated tokens with the trailing eos stripped
    generated_ids: list[int]  # every id the decoder emitted, eos included
    decoder_steps: int

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def greedy_decode(
    model: Seq2Seq,
    input_ids: list[int],
    bos_id: int,
    eos_id: int,
    max_target_len: int,
) -> tuple[list[int], int]:
    """Greedy ids for one input; returns (generated ids, decoder steps).

    Generation stops after emitting eos or after max_target_len tokens.
    """
    model.eval()
    start = model.decoder_steps
    with torch.no_grad():
        src = torch.tensor([input_ids], dtype=torch.long)
        src_pad = torch.zeros(1, len(input_ids), dtype=torch.bool)
        memory = model.encode(src, src_pad)
        prefix = [bos_id]
        generated: list[int] = []
        for _ in range(max_target_len):
            logits = model.decode_logits(
                memory, src_pad, torch.tensor([prefix], dtype=torch.long)
            )
            next_id = int(logits.argmax(dim=-1).item())
            generated.append(next_id)
            prefix.append(next_id)
            if next_id == eos_id:
                break
    return generated, model.decoder_steps - start
