"""Cross-encoder coherence model.

The two utterances are packed into one sequence — classification token
first, a separator after each utterance — and token, position, and segment
embeddings are summed before the transformer encoder stack (self-attention
plus residual connections). The encoder output at the classification
position feeds a one-hidden-layer perceptron whose logistic output is the
coherence score in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

from .data import Vocab


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 2
    ffn_dim: int = 128
    max_len: int = 64
    head_hidden: int | None = None  # defaults to d_model

    def resolved_head_hidden(self) -> int:
        return self.head_hidden if self.head_hidden is not None else self.d_model


def encode_pair(vocab: Vocab, s: str, t: str, max_len: int) -> tuple[list[int], list[int]]:
    """Token ids and segment ids for ``[CLS] s [SEP] t [SEP]``.

    Overlength input loses the tail of ``t`` first, then the tail of ``s``;
    the classification token and both separators are always preserved.
    """
    if not s.strip() or not t.strip():
        raise ValueError("cannot encode an empty utterance")
    s_ids = vocab.encode(s)
    t_ids = vocab.encode(t)
    overflow = len(s_ids) + len(t_ids) + 3 - max_len
    if overflow > 0:
        drop_t = min(overflow, len(t_ids))
        t_ids = t_ids[: len(t_ids) - drop_t]
        overflow -= drop_t
        if overflow > 0:
            s_ids = s_ids[: len(s_ids) - overflow]
    ids = [vocab.cls_id, *s_ids, vocab.sep_id, *t_ids, vocab.sep_id]
    segments = [0] * (len(s_ids) + 2) + [1] * (len(t_ids) + 1)
    return ids, segments


class CoherenceCrossEncoder(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        d = config.d_model
        self.token_embedding = nn.Embedding(config.vocab_size, d, padding_idx=0)
        self.position_embedding = nn.Embedding(config.max_len, d)
        self.segment_embedding = nn.Embedding(2, d)
        self.input_norm = nn.LayerNorm(d)
        layer = nn.TransformerEncoderLayer(
            d_model=d,
            nhead=config.n_heads,
            dim_feedforward=config.ffn_dim,
            batch_first=True,
            norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.n_layers, enable_nested_tensor=False)
        hidden = config.resolved_head_hidden()
        self.head = nn.Sequential(
            nn.Linear(d, hidden),
            nn.Tanh(),
            nn.Linear(hidden, 1),
        )

    def forward(self, ids: torch.Tensor, segments: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Coherence scores in [0, 1]; ``mask`` is True at padding positions."""
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.token_embedding(ids) + self.position_embedding(positions) + self.segment_embedding(segments)
        encoded = self.encoder(self.input_norm(x), src_key_padding_mask=mask)
        cls_state = encoded[:, 0]
        return torch.sigmoid(self.head(cls_state)).squeeze(-1)


def collate_pairs(
    vocab: Vocab, texts: list[tuple[str, str]], max_len: int, device: torch.device
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pad a batch of (context, candidate) texts into model inputs."""
    encoded = [encode_pair(vocab, s, t, max_len) for s, t in texts]
    width = max(len(ids) for ids, _ in encoded)
    batch_ids = torch.zeros(len(encoded), width, dtype=torch.long)
    batch_segments = torch.zeros(len(encoded), width, dtype=torch.long)
    batch_mask = torch.ones(len(encoded), width, dtype=torch.bool)
    for row, (ids, segments) in enumerate(encoded):
        batch_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        batch_segments[row, : len(segments)] = torch.tensor(segments, dtype=torch.long)
        batch_mask[row, : len(ids)] = False
    return batch_ids.to(device), batch_segments.to(device), batch_mask.to(device)


def margin_ranking_loss(
    positive_scores: torch.Tensor, negative_scores: torch.Tensor, margin: float
) -> torch.Tensor:
    """Mean over pairs of ``max(0, margin + c_neg - c_pos)``."""
    return torch.clamp(margin + negative_scores - positive_scores, min=0.0).mean()
