"""Unsupervised dialogue topic segmentation via utterance-pair coherence.

The pipeline: parse dialogue corpora (:mod:`dialseg.corpus`), score the
coherence of consecutive utterance pairs with a pluggable backend
(:mod:`dialseg.scorers`), place topic boundaries at sharp coherence
valleys (:mod:`dialseg.segmenter`), and evaluate against gold segment
annotations (:mod:`dialseg.metrics`). :mod:`dialseg.pairgen` generates the
ranking corpus used to train neural coherence scorers served behind the
external-scorer protocol.
"""

__version__ = "0.1.0"

from .corpus import (
    AnnotatedDialogue,
    Corpus,
    Dialogue,
    DialogueAct,
    Utterance,
    parse_canonical_jsonl,
    parse_raw_dialog_corpus,
    write_canonical_jsonl,
)
from .errors import DialsegError, FormatError
from .metrics import EvalReport, boundary_f1, depth_variance, evaluate_corpus, pk, window_diff
from .pairgen import (
    GenConfig,
    TripletInstance,
    TripletSet,
    generate_triplets,
    read_triplets_jsonl,
    split_triplets,
    write_triplets_jsonl,
)
from .scorers import (
    CoherenceProfile,
    EmbeddingScorer,
    EmbeddingTable,
    ExternalScorer,
    LexicalScorer,
    external_score_batch,
    load_embedding_table,
    score_dialogue,
    score_pair,
)
from .segmenter import DepthProfile, Segmentation, depth_profile, random_segment, segment

__all__ = [
    "AnnotatedDialogue",
    "CoherenceProfile",
    "Corpus",
    "DepthProfile",
    "Dialogue",
    "DialogueAct",
    "DialsegError",
    "EmbeddingScorer",
    "EmbeddingTable",
    "EvalReport",
    "ExternalScorer",
    "FormatError",
    "GenConfig",
    "LexicalScorer",
    "Segmentation",
    "TripletInstance",
    "TripletSet",
    "Utterance",
    "boundary_f1",
    "depth_profile",
    "depth_variance",
    "evaluate_corpus",
    "external_score_batch",
    "generate_triplets",
    "load_embedding_table",
    "parse_canonical_jsonl",
    "parse_raw_dialog_corpus",
    "pk",
    "random_segment",
    "read_triplets_jsonl",
    "score_dialogue",
    "score_pair",
    "segment",
    "split_triplets",
    "window_diff",
    "write_canonical_jsonl",
]
