"""Ranking-loss training of the coherence cross-encoder.

Every triplet expands into two ranking pairs; the model minimizes the mean
hinge ``max(0, margin + c_neg - c_pos)`` over all pairs with AdamW and a
warmup-then-linear-decay schedule. After each epoch the validation ranking
accuracy (fraction of pairs scoring the positive above the negative) is
logged, and the best-scoring weights are kept as the checkpoint.

Checkpoint directory layout::

    checkpoint/
      config.json   # trainer + model config, head shape, training history
      vocab.json    # word-level vocabulary  (builtin encoder only)
      weights.pt    # model state dict
      backbone/     # pretrained backbone + tokenizer (pretrained path only)
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import DataError, RankingPair, Vocab, expand_ranking_pairs, load_triplets
from .model import CoherenceCrossEncoder, ModelConfig, collate_pairs, margin_ranking_loss

ETA_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)


@dataclass
class TrainerConfig:
    seed: int
    margin: float = 1.0
    learning_rate: float = 2e-5
    epochs: int = 10
    batch_size: int = 16
    max_len: int = 64
    base_model: str | None = None  # pretrained next-sentence backbone; builtin encoder when None
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 2
    ffn_dim: int = 128
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")


class TrainingError(Exception):
    pass


class BuiltinScorer:
    """Word-level vocabulary + from-scratch transformer cross-encoder."""

    kind = "builtin"

    def __init__(self, vocab: Vocab, model: CoherenceCrossEncoder):
        self.vocab = vocab
        self.model = model

    @classmethod
    def fresh(cls, texts: list[str], config: TrainerConfig) -> "BuiltinScorer":
        vocab = Vocab.build(texts)
        model_config = ModelConfig(
            vocab_size=len(vocab),
            d_model=config.d_model,
            n_layers=config.n_layers,
            n_heads=config.n_heads,
            ffn_dim=config.ffn_dim,
            max_len=config.max_len,
        )
        return cls(vocab, CoherenceCrossEncoder(model_config))

    def score_texts(self, pairs: list[tuple[str, str]], device: torch.device) -> torch.Tensor:
        ids, segments, mask = collate_pairs(self.vocab, pairs, self.model.config.max_len, device)
        return self.model(ids, segments, mask)

    def save(self, out_dir: Path, manifest: dict) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "vocab.json", "w", encoding="utf-8") as f:
            self.vocab.save(f)
        torch.save(self.model.state_dict(), out_dir / "weights.pt")
        manifest = {
            **manifest,
            "kind": self.kind,
            "model": asdict(self.model.config),
            "head": {"hidden_layers": 1, "hidden_width": self.model.config.resolved_head_hidden()},
        }
        (out_dir / "config.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, checkpoint: Path) -> "BuiltinScorer":
        manifest = json.loads((checkpoint / "config.json").read_text())
        with open(checkpoint / "vocab.json", "r", encoding="utf-8") as f:
            vocab = Vocab.load(f)
        model = CoherenceCrossEncoder(ModelConfig(**manifest["model"]))
        model.load_state_dict(torch.load(checkpoint / "weights.pt", map_location="cpu", weights_only=True))
        model.eval()
        return cls(vocab, model)


class PretrainedScorer:
    """Pretrained next-sentence backbone with the same perceptron head."""

    kind = "pretrained"

    def __init__(self, tokenizer, backbone, head: torch.nn.Module, max_len: int):
        self.tokenizer = tokenizer
        self.backbone = backbone
        self.head = head
        self.max_len = max_len

    @property
    def model(self) -> torch.nn.Module:
        return torch.nn.ModuleList([self.backbone, self.head])

    @classmethod
    def fresh(cls, config: TrainerConfig) -> "PretrainedScorer":
        from transformers import AutoModel, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(config.base_model)
        backbone = AutoModel.from_pretrained(config.base_model)
        hidden = backbone.config.hidden_size
        head = torch.nn.Sequential(
            torch.nn.Linear(hidden, hidden), torch.nn.Tanh(), torch.nn.Linear(hidden, 1)
        )
        return cls(tokenizer, backbone, head, config.max_len)

    def score_texts(self, pairs: list[tuple[str, str]], device: torch.device) -> torch.Tensor:
        batch = self.tokenizer(
            [s for s, _ in pairs],
            [t for _, t in pairs],
            padding=True,
            truncation="only_second",
            max_length=self.max_len,
            return_tensors="pt",
        ).to(device)
        hidden = self.backbone(**batch).last_hidden_state[:, 0]
        return torch.sigmoid(self.head(hidden)).squeeze(-1)

    def save(self, out_dir: Path, manifest: dict) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        self.tokenizer.save_pretrained(out_dir / "backbone")
        self.backbone.save_pretrained(out_dir / "backbone")
        torch.save(self.head.state_dict(), out_dir / "weights.pt")
        hidden = self.backbone.config.hidden_size
        manifest = {
            **manifest,
            "kind": self.kind,
            "max_len": self.max_len,
            "head": {"hidden_layers": 1, "hidden_width": hidden},
        }
        (out_dir / "config.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, checkpoint: Path) -> "PretrainedScorer":
        from transformers import AutoModel, AutoTokenizer

        manifest = json.loads((checkpoint / "config.json").read_text())
        tokenizer = AutoTokenizer.from_pretrained(checkpoint / "backbone")
        backbone = AutoModel.from_pretrained(checkpoint / "backbone")
        hidden = backbone.config.hidden_size
        head = torch.nn.Sequential(
            torch.nn.Linear(hidden, hidden), torch.nn.Tanh(), torch.nn.Linear(hidden, 1)
        )
        head.load_state_dict(torch.load(checkpoint / "weights.pt", map_location="cpu", weights_only=True))
        for module in (backbone, head):
            module.eval()
        return cls(tokenizer, backbone, head, manifest["max_len"])


def load_checkpoint(checkpoint: str | Path):
    checkpoint = Path(checkpoint)
    manifest = json.loads((checkpoint / "config.json").read_text())
    scorer_cls = {"builtin": BuiltinScorer, "pretrained": PretrainedScorer}[manifest["kind"]]
    return scorer_cls.load(checkpoint)


def ranking_accuracy(scorer, pairs: list[RankingPair], batch_size: int, device: torch.device) -> float:
    """Fraction of pairs whose positive outscores the negative."""
    if not pairs:
        raise TrainingError("no validation pairs")
    correct = 0
    scorer.model.eval()
    with torch.no_grad():
        for start in range(0, len(pairs), batch_size):
            chunk = pairs[start : start + batch_size]
            pos = scorer.score_texts([(p.anchor, p.positive) for p in chunk], device)
            neg = scorer.score_texts([(p.anchor, p.negative) for p in chunk], device)
            correct += int((pos > neg).sum())
    return correct / len(pairs)


def _lr_lambda(step: int, total: int, warmup: int) -> float:
    if step < warmup:
        return (step + 1) / max(1, warmup)
    remaining = max(1, total - warmup)
    return max(0.0, (total - step) / remaining)


def train(
    train_path: str | Path,
    val_path: str | Path,
    config: TrainerConfig,
    out_dir: str | Path,
    device: str = "cpu",
) -> Path:
    """Train on a triplet file, select the best epoch on validation ranking
    accuracy, and write the checkpoint. Returns the checkpoint path."""
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    device_t = torch.device(device)

    train_triplets = load_triplets(str(train_path))
    if not train_triplets:
        raise TrainingError(f"{train_path}: empty training set")
    val_triplets = load_triplets(str(val_path))
    train_pairs = expand_ranking_pairs(train_triplets)
    val_pairs = expand_ranking_pairs(val_triplets)

    if config.base_model is not None:
        scorer = PretrainedScorer.fresh(config)
    else:
        texts = [t[field] for t in train_triplets for field in ("anchor", "pos", "neg_same", "neg_cross")]
        scorer = BuiltinScorer.fresh(texts, config)
    scorer.model.to(device_t)

    optimizer = torch.optim.AdamW(scorer.model.parameters(), lr=config.learning_rate)
    steps_per_epoch = math.ceil(len(train_pairs) / config.batch_size)
    total_steps = steps_per_epoch * config.epochs
    warmup_steps = int(total_steps * config.warmup_fraction)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: _lr_lambda(step, total_steps, warmup_steps)
    )

    history = []
    best_accuracy = -1.0
    best_state = None
    for epoch in range(1, config.epochs + 1):
        scorer.model.train()
        order = rng.permutation(len(train_pairs))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_pairs[i] for i in order[start : start + config.batch_size]]
            pos = scorer.score_texts([(p.anchor, p.positive) for p in batch], device_t)
            neg = scorer.score_texts([(p.anchor, p.negative) for p in batch], device_t)
            loss = margin_ranking_loss(pos, neg, config.margin)
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}: {loss.item()!r}")
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(scorer.model.parameters(), 1.0)
            optimizer.step()
            scheduler.step()
            epoch_loss += float(loss.detach()) * len(batch)
        val_accuracy = ranking_accuracy(scorer, val_pairs, config.batch_size, device_t)
        history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / len(train_pairs),
                "val_ranking_accuracy": val_accuracy,
            }
        )
        if val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_state = {k: v.detach().clone() for k, v in scorer.model.state_dict().items()}

    if best_state is not None:
        scorer.model.load_state_dict(best_state)
    scorer.model.eval()
    out_dir = Path(out_dir)
    manifest = {
        "trainer": asdict(config),
        "history": history,
        "best_val_ranking_accuracy": best_accuracy,
        "train_pairs": len(train_pairs),
        "val_pairs": len(val_pairs),
    }
    scorer.save(out_dir, manifest)
    return out_dir
