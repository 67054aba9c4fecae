"""Synthetic corpora with known topic structure.

Dialogues are concatenations of topic blocks with mutually disjoint
vocabularies. Every utterance of a block repeats the block's anchor tokens
and introduces fresh block-specific tokens, mimicking how real turns mix
recurring topical terms with novel words. Consecutive same-block
utterances therefore always overlap lexically, cross-block pairs never do,
and the gold boundaries sit exactly at block transitions.

Block lengths are capped so that every dialogue's boundary density stays
strictly above one boundary per five intervals: at exactly 1/5 the
threshold mu - sigma/2 is mathematically zero and its floating-point sign
is arbitrary, which would flip every zero-depth interval in or out of the
boundary set.

Token names encode their topic (``t03a01`` = anchor, ``t03u000042`` =
unique), which lets :func:`one_hot_embedding_table` build embeddings that
separate the topic vocabularies perfectly.
"""

from __future__ import annotations

import numpy as np

from .corpus import AnnotatedDialogue, Corpus, Dialogue, DialogueAct, Utterance
from .scorers import EmbeddingTable, tokenize


def token_topic(token: str) -> int:
    """Topic index encoded in a synthetic token name."""
    if len(token) < 3 or token[0] != "t" or not token[1:3].isdigit():
        raise ValueError(f"not a synthetic topic token: {token!r}")
    return int(token[1:3])


def segmentation_corpus(
    n_dialogues: int,
    rng: np.random.Generator,
    *,
    n_topics: int = 8,
    anchor_tokens: int = 2,
    unique_tokens: int = 3,
    blocks_range: tuple[int, int] = (2, 4),
    block_len_range: tuple[int, int] = (2, 3),
    id_prefix: str = "synth",
) -> list[AnnotatedDialogue]:
    """Dialogues made of 2-4 disjoint-vocabulary topic blocks with gold
    boundaries at the block transitions."""
    if n_topics > 99:
        raise ValueError("topic ids are encoded with two digits")
    out = []
    counter = 0
    for d in range(n_dialogues):
        n_blocks = int(rng.integers(blocks_range[0], blocks_range[1] + 1))
        topics = rng.choice(n_topics, size=n_blocks, replace=False)
        lengths = [int(rng.integers(block_len_range[0], block_len_range[1] + 1)) for _ in topics]
        # Keep boundary density above 1/5 of intervals (see module docstring).
        while sum(lengths) - 1 >= 5 * (n_blocks - 1):
            lengths[int(np.argmax(lengths))] -= 1
        utterances: list[Utterance] = []
        boundaries: set[int] = set()
        for b, (topic, length) in enumerate(zip(topics, lengths)):
            t = int(topic)
            anchors = [f"t{t:02d}a{j:02d}" for j in range(anchor_tokens)]
            for _ in range(length):
                tokens = anchors + [f"t{t:02d}u{counter + i:06d}" for i in range(unique_tokens)]
                counter += unique_tokens
                order = rng.permutation(len(tokens))
                utterances.append(Utterance(" ".join(tokens[i] for i in order)))
            if b < n_blocks - 1:
                boundaries.add(len(utterances) - 1)  # interval after this block
        out.append(
            AnnotatedDialogue(
                dialogue=Dialogue(id=f"{id_prefix}-{d:05d}", utterances=tuple(utterances)),
                boundaries=frozenset(boundaries),
            )
        )
    return out


def one_hot_embedding_table(items: list[AnnotatedDialogue], n_topics: int) -> EmbeddingTable:
    """Map every synthetic token to its topic's standard basis vector."""
    vectors: dict[str, np.ndarray] = {}
    basis = np.eye(n_topics, dtype=np.float32)
    for item in items:
        for u in item.dialogue.utterances:
            for tok in tokenize(u.text):
                vectors[tok] = basis[token_topic(tok)]
    return EmbeddingTable(dimension=n_topics, vectors=vectors)


_ACT_PATTERNS = (
    (DialogueAct.Question, DialogueAct.Inform),
    (DialogueAct.Directive, DialogueAct.Commissive),
    (DialogueAct.Inform,),
    (DialogueAct.Commissive,),
)


def dialogue_corpus_with_acts(
    n_dialogues: int,
    rng: np.random.Generator,
    *,
    n_topics: int = 4,
    words_per_topic: int = 8,
    tokens_per_utterance: int = 5,
    k_range: tuple[int, int] = (6, 12),
    name: str = "synth-acts",
) -> Corpus:
    """Single-topic dialogues with act and topic labels.

    Act sequences are stitched from short patterns, so the regular
    Question->Inform and Directive->Commissive adjacencies occur often;
    suitable for exercising pair generation with flows and topics on.
    """
    dialogues = []
    for d in range(n_dialogues):
        topic = int(rng.integers(n_topics))
        vocab = [f"t{topic:02d}w{w:02d}" for w in range(words_per_topic)]
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        acts: list[DialogueAct] = []
        while len(acts) < k:
            acts.extend(_ACT_PATTERNS[int(rng.integers(len(_ACT_PATTERNS)))])
        acts = acts[:k]
        utterances = []
        for act in acts:
            words = rng.choice(words_per_topic, size=tokens_per_utterance, replace=False)
            utterances.append(Utterance(" ".join(vocab[w] for w in words), act=act))
        dialogues.append(
            Dialogue(id=f"{name}-{d:05d}", utterances=tuple(utterances), topic=f"topic-{topic}")
        )
    return Corpus(dialogues=tuple(dialogues), name=name, language="zxx")
