"""Trainable utterance-pair coherence cross-encoder with an HTTP service."""

__version__ = "0.1.0"

from .data import RankingPair, Vocab, expand_ranking_pairs, load_triplets, read_triplets
from .model import CoherenceCrossEncoder, ModelConfig, encode_pair, margin_ranking_loss
from .serve import create_app
from .train import TrainerConfig, load_checkpoint, ranking_accuracy, train

__all__ = [
    "CoherenceCrossEncoder",
    "ModelConfig",
    "RankingPair",
    "TrainerConfig",
    "Vocab",
    "create_app",
    "encode_pair",
    "expand_ranking_pairs",
    "load_checkpoint",
    "load_triplets",
    "margin_ranking_loss",
    "ranking_accuracy",
    "read_triplets",
    "train",
]
