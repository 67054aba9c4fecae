import json
from pathlib import Path

import numpy as np
import pytest


def toy_triplets(n: int, rng: np.random.Generator, n_topics: int = 2, vocab_size: int = 8,
                 words: int = 6) -> list[dict]:
    """Topic-disjoint synthetic dialogues flattened into triplets: anchor and
    positive share a topic block, both negatives come from other topics."""
    vocab = [[f"topic{t}word{w}" for w in range(vocab_size)] for t in range(n_topics)]

    def utt(t: int) -> str:
        return " ".join(vocab[t][i] for i in rng.choice(vocab_size, size=words, replace=False))

    out = []
    for i in range(n):
        t1 = int(rng.integers(n_topics))
        others = [t for t in range(n_topics) if t != t1]
        t2 = others[int(rng.integers(len(others)))]
        t3 = others[int(rng.integers(len(others)))]
        d_id = f"toy-{i:05d}"
        out.append(
            {
                "anchor": utt(t1),
                "pos": utt(t1),
                "neg_same": utt(t2),
                "neg_cross": utt(t3),
                "meta": {
                    "anchor": [d_id, 0],
                    "pos": [d_id, 1],
                    "neg_same": [d_id, 3],
                    "neg_cross": [f"toy-x-{i:05d}", 0],
                },
            }
        )
    return out


def write_jsonl(path: Path, triplets: list[dict]) -> Path:
    path.write_text("".join(json.dumps(t) + "\n" for t in triplets))
    return path


@pytest.fixture
def toy_files(tmp_path):
    rng = np.random.default_rng(7)
    train = write_jsonl(tmp_path / "train.jsonl", toy_triplets(1000, rng))
    val = write_jsonl(tmp_path / "val.jsonl", toy_triplets(200, rng))
    return train, val
