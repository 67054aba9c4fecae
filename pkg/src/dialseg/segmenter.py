"""Topic-boundary inference from coherence profiles.

Given per-interval coherence scores ``c_1..c_{k-1}``, each interval gets a
depth score measuring how sharp a coherence valley it sits in::

    dp_i = (hl(i) + hr(i) - 2 * c_i) / 2

where ``hl(i)`` / ``hr(i)`` are the peak values reached by climbing left /
right from interval ``i`` while scores are strictly increasing (a tie stops
the climb, so plateaus contribute zero depth). Boundaries are the intervals
whose depth strictly exceeds the threshold ``tau = mean - stddev / 2``
computed over the dialogue's depth scores (population standard deviation).

Consequences worth knowing: a constant profile yields no boundaries, k <= 2
dialogues yield no boundaries, and adjacent intervals may both exceed the
threshold (singleton segments are allowed).

All functions here are pure; a seeded generator drives the random baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scorers import CoherenceProfile


@dataclass(frozen=True)
class DepthProfile:
    """Depth scores with the threshold statistics they imply."""

    depths: tuple[float, ...]
    mean: float
    stddev: float
    threshold: float

    def __len__(self) -> int:
        return len(self.depths)


@dataclass(frozen=True)
class Segmentation:
    """Predicted boundary intervals for one dialogue."""

    dialogue_id: str
    boundaries: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "boundaries", frozenset(self.boundaries))


def _as_scores(profile: CoherenceProfile | Sequence[float]) -> np.ndarray:
    scores = profile.scores if isinstance(profile, CoherenceProfile) else profile
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("profile must be a non-empty 1-d score sequence")
    return arr


def depth_profile(profile: CoherenceProfile | Sequence[float]) -> DepthProfile:
    """Compute depth scores and the boundary threshold for a profile."""
    c = _as_scores(profile)
    n = c.size
    depths = np.empty(n, dtype=np.float64)
    for i in range(n):
        hl = c[i]
        j = i - 1
        while j >= 0 and c[j] > hl:
            hl = c[j]
            j -= 1
        hr = c[i]
        j = i + 1
        while j < n and c[j] > hr:
            hr = c[j]
            j += 1
        depths[i] = (hl + hr - 2.0 * c[i]) / 2.0
    mean = float(np.mean(depths))
    stddev = float(np.std(depths))  # population standard deviation
    return DepthProfile(
        depths=tuple(float(d) for d in depths),
        mean=mean,
        stddev=stddev,
        threshold=mean - stddev / 2.0,
    )


def segment(profile: CoherenceProfile | Sequence[float]) -> Segmentation:
    """Boundaries are the intervals with depth strictly above the threshold."""
    dp = depth_profile(profile)
    dialogue_id = profile.dialogue_id if isinstance(profile, CoherenceProfile) else ""
    boundaries = frozenset(i for i, d in enumerate(dp.depths) if d > dp.threshold)
    return Segmentation(dialogue_id=dialogue_id, boundaries=boundaries)


def random_segment(k: int, rng: np.random.Generator, dialogue_id: str = "") -> Segmentation:
    """Random baseline: draw b uniformly from {0..k-1}, then mark each of
    the k-1 intervals independently with probability b/k."""
    if k < 1:
        raise ValueError("dialogue must have at least one utterance")
    if k == 1:
        return Segmentation(dialogue_id=dialogue_id, boundaries=frozenset())
    b = int(rng.integers(0, k))
    marks = rng.random(k - 1) < (b / k)
    return Segmentation(
        dialogue_id=dialogue_id,
        boundaries=frozenset(int(i) for i in np.flatnonzero(marks)),
    )
