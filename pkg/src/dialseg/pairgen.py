"""Training-corpus generation for utterance-pair coherence ranking.

Every positive instance is an adjacent utterance pair ``(u_i, u_{i+1})``.
When act flows are enabled and the dialogue carries act labels, only the
regular act bigrams Question->Inform and Directive->Commissive are kept.
Each positive gets two negatives replacing the second element:

* ``neg_same`` — an utterance of the same dialogue at an index ``j`` with
  ``j not in {i-1, i, i+1}`` (so ``|j - i| >= 2``); with act flows on its
  act must differ from the positive's act;
* ``neg_cross`` — an utterance from a different dialogue; with the topic
  constraint on, that dialogue's topic must differ from the source's.

The implied score ordering is anchor/positive > anchor/neg_same >
anchor/neg_cross, and each instance expands downstream into exactly two
ranking pairs: (positive vs neg_same) and (positive vs neg_cross).

Negatives are drawn uniformly from the exact legal candidate sets, so a
constraint violation is impossible by construction; a positive whose
candidate set is empty is skipped and counted by reason. Generation is a
pure function of (corpus, config, seed) with output in canonical order
(dialogue id, then anchor index).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import Corpus, DialogueAct, corpus_sha256
from .errors import DialsegError, FormatError

FLOW_BIGRAMS = frozenset(
    {
        (DialogueAct.Question, DialogueAct.Inform),
        (DialogueAct.Directive, DialogueAct.Commissive),
    }
)

# Stage salts keep the generation and split RNG streams independent.
_GEN_STAGE = 1
_SPLIT_STAGE = 2


class GenerationError(DialsegError):
    pass


class UnsatisfiableConstraintError(GenerationError):
    """No legal cross-dialogue negative exists for some anchor."""


@dataclass(frozen=True)
class GenConfig:
    seed: int
    use_act_flows: bool = True
    use_topic_constraint: bool = True
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    split_unit: str = "instance"

    def __post_init__(self):
        if not math.isclose(sum(self.split_ratios), 1.0, abs_tol=1e-9):
            raise ValueError(f"split ratios {self.split_ratios} do not sum to 1")
        if any(r < 0 for r in self.split_ratios):
            raise ValueError("split ratios must be non-negative")
        if self.split_unit not in ("instance", "dialogue"):
            raise ValueError(f"unknown split unit {self.split_unit!r}")


@dataclass(frozen=True)
class TripletInstance:
    """Anchor, adjacent positive, and the two negatives, with provenance."""

    anchor: str
    positive: str
    neg_same: str
    neg_cross: str
    anchor_ref: tuple[str, int]
    positive_ref: tuple[str, int]
    neg_same_ref: tuple[str, int]
    neg_cross_ref: tuple[str, int]

    def __post_init__(self):
        for name in ("anchor_ref", "positive_ref", "neg_same_ref", "neg_cross_ref"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        d_id, i = self.anchor_ref
        if self.positive_ref != (d_id, i + 1):
            raise ValueError(f"positive {self.positive_ref} is not adjacent to anchor {self.anchor_ref}")
        if self.neg_same_ref[0] != d_id or abs(self.neg_same_ref[1] - i) < 2:
            raise ValueError(f"neg_same {self.neg_same_ref} too close to anchor {self.anchor_ref}")
        if self.neg_cross_ref[0] == d_id:
            raise ValueError(f"neg_cross {self.neg_cross_ref} is from the anchor's dialogue")


@dataclass(frozen=True)
class TripletSet:
    instances: tuple[TripletInstance, ...]
    skipped: dict

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "skipped", dict(self.skipped))

    def __len__(self) -> int:
        return len(self.instances)


def _child_generators(seed: int, count: int, rng: np.random.Generator | None) -> list[np.random.Generator]:
    if rng is not None:
        return list(rng.spawn(count))
    ss = np.random.SeedSequence((seed, _GEN_STAGE))
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(count)]


def generate_triplets(
    corpus: Corpus, config: GenConfig, rng: np.random.Generator | None = None
) -> TripletSet:
    """Generate one triplet per surviving positive pair.

    Dialogues shorter than 4 utterances cannot host a legal same-dialogue
    negative and are skipped (counted per candidate positive). Raises
    UnsatisfiableConstraintError when no cross-dialogue negative exists at
    all (single-dialogue corpus, or the topic constraint is on and every
    dialogue shares one topic).
    """
    if not corpus.dialogues:
        raise GenerationError("corpus is empty")

    order = sorted(corpus.dialogues, key=lambda d: d.id)
    children = _child_generators(config.seed, len(order), rng)
    topics_available = all(d.topic is not None for d in order)
    constrain_topic = config.use_topic_constraint and topics_available

    # Cross-dialogue candidate indices, keyed by the source dialogue's topic
    # when the topic constraint is active.
    cross_pools: dict[str | None, list[int]] = {}
    if constrain_topic:
        for topic in {d.topic for d in order}:
            cross_pools[topic] = [i for i, d in enumerate(order) if d.topic != topic]

    instances: list[TripletInstance] = []
    skipped: Counter = Counter()
    for di, dialogue in enumerate(order):
        g = children[di]
        k = len(dialogue)
        acts_available = all(u.act is not None for u in dialogue.utterances)
        flows_on = config.use_act_flows and acts_available

        candidates = range(k - 1)
        if flows_on:
            candidates = [
                i
                for i in candidates
                if (dialogue.utterances[i].act, dialogue.utterances[i + 1].act) in FLOW_BIGRAMS
            ]
        else:
            candidates = list(candidates)

        if k < 4:
            skipped["dialogue_too_short"] += len(candidates)
            continue

        for i in candidates:
            pos_act = dialogue.utterances[i + 1].act
            legal_same = [
                j
                for j in range(k)
                if abs(j - i) >= 2 and not (flows_on and dialogue.utterances[j].act == pos_act)
            ]
            if not legal_same:
                skipped["no_same_dialogue_negative"] += 1
                continue
            j = legal_same[int(g.integers(len(legal_same)))]

            if constrain_topic:
                pool = cross_pools[dialogue.topic]
                if not pool:
                    raise UnsatisfiableConstraintError(
                        f"no dialogue with a topic different from {dialogue.topic!r}: "
                        "cross-dialogue negatives are unsatisfiable"
                    )
                mi = pool[int(g.integers(len(pool)))]
            else:
                if len(order) < 2:
                    raise UnsatisfiableConstraintError(
                        "corpus has a single dialogue: cross-dialogue negatives are unsatisfiable"
                    )
                mi = int(g.integers(len(order) - 1))
                if mi >= di:
                    mi += 1
            other = order[mi]
            m = int(g.integers(len(other)))

            instances.append(
                TripletInstance(
                    anchor=dialogue.utterances[i].text,
                    positive=dialogue.utterances[i + 1].text,
                    neg_same=dialogue.utterances[j].text,
                    neg_cross=other.utterances[m].text,
                    anchor_ref=(dialogue.id, i),
                    positive_ref=(dialogue.id, i + 1),
                    neg_same_ref=(dialogue.id, j),
                    neg_cross_ref=(other.id, m),
                )
            )
    return TripletSet(instances=tuple(instances), skipped=dict(skipped))


def _fold_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment; every fold is within 1 of n * ratio."""
    floors = [int(math.floor(n * r)) for r in ratios]
    remainders = [n * r - f for r, f in zip(ratios, floors)]
    for idx in sorted(range(len(ratios)), key=lambda i: -remainders[i])[: n - sum(floors)]:
        floors[idx] += 1
    return floors


def split_triplets(
    triplets: TripletSet, config: GenConfig, rng: np.random.Generator | None = None
) -> tuple[list[TripletInstance], list[TripletInstance], list[TripletInstance]]:
    """Deterministic, exhaustive, disjoint train/val/test split.

    With ``split_unit="dialogue"`` all instances anchored in one dialogue
    land in the same fold (prevents anchor leakage across folds).
    """
    instances = list(triplets.instances)
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, _SPLIT_STAGE))))

    if config.split_unit == "instance":
        if len(instances) < 3:
            raise GenerationError(f"cannot split {len(instances)} instances into 3 folds")
        perm = rng.permutation(len(instances))
        sizes = _fold_sizes(len(instances), config.split_ratios)
        shuffled = [instances[i] for i in perm]
        a, b = sizes[0], sizes[0] + sizes[1]
        return shuffled[:a], shuffled[a:b], shuffled[b:]

    dialogue_ids = sorted({inst.anchor_ref[0] for inst in instances})
    if len(dialogue_ids) < 3:
        raise GenerationError(f"cannot split {len(dialogue_ids)} dialogues into 3 folds")
    perm = rng.permutation(len(dialogue_ids))
    sizes = _fold_sizes(len(dialogue_ids), config.split_ratios)
    fold_of: dict[str, int] = {}
    cursor = 0
    for fold, size in enumerate(sizes):
        for p in perm[cursor : cursor + size]:
            fold_of[dialogue_ids[p]] = fold
        cursor += size
    folds: tuple[list[TripletInstance], ...] = ([], [], [])
    for inst in instances:
        folds[fold_of[inst.anchor_ref[0]]].append(inst)
    return folds


def _instance_to_dict(inst: TripletInstance) -> dict:
    return {
        "anchor": inst.anchor,
        "pos": inst.positive,
        "neg_same": inst.neg_same,
        "neg_cross": inst.neg_cross,
        "meta": {
            "anchor": list(inst.anchor_ref),
            "pos": list(inst.positive_ref),
            "neg_same": list(inst.neg_same_ref),
            "neg_cross": list(inst.neg_cross_ref),
        },
    }


def write_triplets_jsonl(
    triplets: TripletSet | Iterable[TripletInstance], stream: IO[str]
) -> None:
    instances = triplets.instances if isinstance(triplets, TripletSet) else triplets
    for inst in instances:
        stream.write(json.dumps(_instance_to_dict(inst), ensure_ascii=False))
        stream.write("\n")


def read_triplets_jsonl(stream: Iterable[str]) -> list[TripletInstance]:
    out = []
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed JSON ({exc.msg})", line=lineno) from None
        try:
            meta = obj["meta"]
            out.append(
                TripletInstance(
                    anchor=obj["anchor"],
                    positive=obj["pos"],
                    neg_same=obj["neg_same"],
                    neg_cross=obj["neg_cross"],
                    anchor_ref=tuple(meta["anchor"]),
                    positive_ref=tuple(meta["pos"]),
                    neg_same_ref=tuple(meta["neg_same"]),
                    neg_cross_ref=tuple(meta["neg_cross"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(str(exc), line=lineno) from None
    return out


def generation_manifest(corpus: Corpus, config: GenConfig, triplets: TripletSet) -> dict:
    """Everything needed to re-derive a generated set: config, seed, corpus
    checksum, and skip counts. Each instance expands to two ranking pairs."""
    return {
        "seed": config.seed,
        "config": {
            "use_act_flows": config.use_act_flows,
            "use_topic_constraint": config.use_topic_constraint,
            "split_ratios": list(config.split_ratios),
            "split_unit": config.split_unit,
        },
        "corpus": {
            "name": corpus.name,
            "language": corpus.language,
            "n_dialogues": len(corpus),
            "sha256": corpus_sha256(corpus),
        },
        "instances": len(triplets),
        "ranking_pairs": 2 * len(triplets),
        "skipped": dict(triplets.skipped),
    }
