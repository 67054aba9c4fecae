"""Triplet files and their expansion into ranking pairs.

The training corpus is JSONL with one triplet per line::

    {"anchor": "...", "pos": "...", "neg_same": "...", "neg_cross": "...",
     "meta": {...provenance, ignored here...}}

Each triplet expands into two ranking pairs sharing the anchor: the
positive against the same-dialogue negative, and the positive against the
cross-dialogue negative. Both contribute independent hinge terms to the
ranking loss.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

TEXT_FIELDS = ("anchor", "pos", "neg_same", "neg_cross")


class DataError(Exception):
    pass


@dataclass(frozen=True)
class RankingPair:
    """Anchor with a positive and one negative candidate next turn."""

    anchor: str
    positive: str
    negative: str


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def read_triplets(stream: Iterable[str]) -> list[dict]:
    triplets = []
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        missing = [f for f in TEXT_FIELDS if not isinstance(obj.get(f), str) or not obj[f].strip()]
        if missing:
            raise DataError(f"line {lineno}: missing or empty fields {missing}")
        triplets.append(obj)
    return triplets


def load_triplets(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return read_triplets(f)


def expand_ranking_pairs(triplets: Iterable[dict]) -> list[RankingPair]:
    pairs = []
    for t in triplets:
        pairs.append(RankingPair(t["anchor"], t["pos"], t["neg_same"]))
        pairs.append(RankingPair(t["anchor"], t["pos"], t["neg_cross"]))
    return pairs


class Vocab:
    """Word-level vocabulary with the special tokens the encoder expects."""

    PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"

    def __init__(self, tokens: list[str]):
        specials = [self.PAD, self.UNK, self.CLS, self.SEP]
        self.itos = specials + [t for t in tokens if t not in set(specials)]
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    @property
    def pad_id(self) -> int:
        return self.stoi[self.PAD]

    @property
    def cls_id(self) -> int:
        return self.stoi[self.CLS]

    @property
    def sep_id(self) -> int:
        return self.stoi[self.SEP]

    def encode(self, text: str) -> list[int]:
        unk = self.stoi[self.UNK]
        return [self.stoi.get(t, unk) for t in tokenize(text)]

    @classmethod
    def build(cls, texts: Iterable[str], min_count: int = 1, max_size: int | None = None) -> "Vocab":
        counts = Counter()
        for text in texts:
            counts.update(tokenize(text))
        items = [t for t, c in counts.most_common(max_size) if c >= min_count]
        return cls(items)

    def save(self, stream: IO[str]) -> None:
        json.dump({"tokens": self.itos}, stream)

    @classmethod
    def load(cls, stream: IO[str]) -> "Vocab":
        tokens = json.load(stream)["tokens"]
        vocab = cls.__new__(cls)
        vocab.itos = tokens
        vocab.stoi = {t: i for i, t in enumerate(tokens)}
        return vocab
