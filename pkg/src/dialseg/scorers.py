"""Coherence scoring backends for consecutive utterance pairs.

Every backend maps an utterance pair to a topical-coherence score in
``[0, 1]``. Three backends are provided:

* :class:`LexicalScorer` — cosine of TF-IDF vectors built from the pair
  itself (document frequency over the two utterances, no corpus
  statistics), so the method stays fully unsupervised and corpus-free;
* :class:`EmbeddingScorer` — cosine of mean-pooled word vectors, mapped
  from ``[-1, 1]`` into ``[0, 1]`` by ``(cos + 1) / 2``;
* :class:`ExternalScorer` — HTTP client for a remote scorer speaking the
  wire protocol (``POST /score`` with ``{"pairs": [[u1, u2], ...]}``,
  response ``{"scores": [...]}``; at most 64 pairs per request).

Tokenization is lowercased unicode word-character splitting; punctuation
is discarded. Text in scripts written without spaces (e.g. Chinese) should
be pre-tokenized upstream, since contiguous runs collapse to one token.

Backends are read-only after construction and safe for concurrent use.
"""

from __future__ import annotations

import json
import math
import re
import threading
from collections import Counter, OrderedDict
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import Dialogue, Utterance
from .errors import DialsegError, FormatError

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

# Wire-protocol batch ceiling; servers reject larger requests.
MAX_BATCH_PAIRS = 64


class ScoringError(DialsegError):
    """A pairwise scoring failure, annotated with the interval it hit."""

    def __init__(self, message: str, interval: int | None = None):
        self.interval = interval
        if interval is not None:
            message = f"interval {interval}: {message}"
        super().__init__(message)


class DialogueTooShortError(DialsegError):
    pass


class OOVError(DialsegError, KeyError):
    """Raised on lookup of a token absent from an embedding table."""


class ExternalScorerError(DialsegError):
    """Failure talking to an external scorer endpoint.

    ``retryable`` is True for transport-level failures (timeouts,
    connection errors, 5xx) and False for contract violations.
    """

    def __init__(self, message: str, retryable: bool = False):
        self.retryable = retryable
        super().__init__(message)


@dataclass(frozen=True)
class CoherenceProfile:
    """Per-interval coherence scores of one dialogue (length ``k - 1``)."""

    dialogue_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if not self.scores:
            raise ValueError("coherence profile must have at least one interval")
        for i, s in enumerate(self.scores):
            if not math.isfinite(s) or not 0.0 <= s <= 1.0:
                raise ValueError(f"score {s!r} at interval {i} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.scores)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class EmbeddingTable:
    """Token -> d-dimensional vector map with a fixed dimension.

    Lookup of an unknown token raises :class:`OOVError`; there is no
    silent zero-vector fallback.
    """

    def __init__(self, dimension: int, vectors: dict[str, np.ndarray], duplicates: int = 0):
        if dimension < 1:
            raise ValueError("embedding dimension must be positive")
        self.dimension = dimension
        self.duplicates = duplicates  # overwritten tokens seen while loading
        self._vectors = vectors

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def vector(self, token: str) -> np.ndarray:
        try:
            return self._vectors[token]
        except KeyError:
            raise OOVError(f"token {token!r} not in embedding table") from None


def load_embedding_table(stream: Iterable[str]) -> EmbeddingTable:
    """Load a word-vector text file: ``token v1 v2 ... vd`` per line.

    The dimension is inferred from the first line. Duplicate tokens are
    overwritten (last wins) and counted in ``EmbeddingTable.duplicates``.
    Raises FormatError on inconsistent dimensions or non-numeric fields.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    duplicates = 0
    for lineno, line in enumerate(stream, 1):
        parts = line.rstrip().split()
        if not parts:
            continue
        token, fields = parts[0], parts[1:]
        if dimension is None:
            if not fields:
                raise FormatError("first record has no vector components", line=lineno)
            dimension = len(fields)
        elif len(fields) != dimension:
            raise FormatError(
                f"expected {dimension} vector components, got {len(fields)}", line=lineno
            )
        try:
            vec = np.array([float(f) for f in fields], dtype=np.float32)
        except ValueError:
            raise FormatError(f"non-numeric vector component for token {token!r}", line=lineno) from None
        if token in vectors:
            duplicates += 1
        vectors[token] = vec
    if dimension is None:
        raise FormatError("embedding stream is empty")
    return EmbeddingTable(dimension=dimension, vectors=vectors, duplicates=duplicates)


class LexicalScorer:
    """TF-IDF cosine over the pair's own tokens.

    TF is the raw within-utterance count; IDF is ``ln((1+k)/(1+df)) + 1``
    with ``k = 2`` documents (the two utterances). Weights are
    non-negative, so the cosine already lies in ``[0, 1]``. Utterances
    with no tokens at all score 0 against everything.
    """

    def score_pair(self, text1: str, text2: str) -> float:
        tf1 = Counter(tokenize(text1))
        tf2 = Counter(tokenize(text2))
        if not tf1 or not tf2:
            return 0.0
        if tf1 == tf2:
            return 1.0  # identical vectors: cosine is 1 by definition
        idf = {}
        for term in tf1.keys() | tf2.keys():
            df = (term in tf1) + (term in tf2)
            idf[term] = math.log(3.0 / (1.0 + df)) + 1.0
        v1 = {t: c * idf[t] for t, c in tf1.items()}
        v2 = {t: c * idf[t] for t, c in tf2.items()}
        dot = sum(w * v2[t] for t, w in v1.items() if t in v2)
        n1 = math.sqrt(sum(w * w for w in v1.values()))
        n2 = math.sqrt(sum(w * w for w in v2.values()))
        return min(max(dot / (n1 * n2), 0.0), 1.0)


class EmbeddingScorer:
    """Cosine of mean-pooled word vectors, remapped by ``(cos + 1) / 2``.

    Unknown tokens are skipped. A pair where either side has no known
    token scores 0.5 (maximal uncertainty); such pairs are counted in
    ``oov_pairs`` as a diagnostics report.
    """

    def __init__(self, table: EmbeddingTable):
        self.table = table
        self._lock = threading.Lock()
        self._oov_pairs = 0

    @property
    def oov_pairs(self) -> int:
        return self._oov_pairs

    def _pool(self, text: str) -> np.ndarray | None:
        known = [self.table.vector(t) for t in tokenize(text) if t in self.table]
        if not known:
            return None
        return np.mean(np.stack(known).astype(np.float64), axis=0)

    def score_pair(self, text1: str, text2: str) -> float:
        v1 = self._pool(text1)
        v2 = self._pool(text2)
        if v1 is None or v2 is None:
            with self._lock:
                self._oov_pairs += 1
            return 0.5
        n1 = float(np.linalg.norm(v1))
        n2 = float(np.linalg.norm(v2))
        if n1 == 0.0 or n2 == 0.0:
            return 0.5  # degenerate direction carries no signal
        if np.array_equal(v1, v2):
            cos = 1.0
        else:
            cos = min(max(float(np.dot(v1, v2) / (n1 * n2)), -1.0), 1.0)
        return (cos + 1.0) / 2.0


def _requests_transport(url: str, payload: dict, timeout: float, headers: dict) -> tuple[int, str]:
    import requests

    try:
        resp = requests.post(url, json=payload, timeout=timeout, headers=headers)
    except requests.Timeout:
        raise ExternalScorerError(f"timeout after {timeout}s calling {url}", retryable=True) from None
    except requests.RequestException as exc:
        raise ExternalScorerError(f"transport failure calling {url}: {exc}", retryable=True) from None
    return resp.status_code, resp.text


class ExternalScorer:
    """Client for a remote coherence scorer speaking the wire protocol.

    Requests are chunked to at most :data:`MAX_BATCH_PAIRS` pairs. Scores
    are cached per ``(u1, u2)`` text pair in an LRU of ``cache_size``
    entries, so re-scoring a dialogue issues no new requests. The client
    rejects responses whose score list is misaligned or out of ``[0, 1]``.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = 30.0,
        cache_size: int = 4096,
        auth_token: str | None = None,
        transport: Callable[[str, dict, float, dict], tuple[int, str]] | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._transport = transport or _requests_transport
        self._headers = {"Content-Type": "application/json"}
        if auth_token:
            self._headers["Authorization"] = f"Bearer {auth_token}"
        self._cache: OrderedDict[tuple[str, str], float] = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()
        self._request_count = 0

    @property
    def request_count(self) -> int:
        """Number of HTTP requests actually issued (cache misses only)."""
        return self._request_count

    def _cache_get(self, key: tuple[str, str]) -> float | None:
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        return None

    def _cache_put(self, key: tuple[str, str], value: float) -> None:
        with self._lock:
            self._cache[key] = value  # last writer wins
            self._cache.move_to_end(key)
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)

    def _post_chunk(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        with self._lock:
            self._request_count += 1
        status, body = self._transport(
            self.endpoint + "/score", {"pairs": [list(p) for p in pairs]}, self.timeout, self._headers
        )
        if not 200 <= status < 300:
            raise ExternalScorerError(
                f"scorer endpoint returned HTTP {status}", retryable=status >= 500
            )
        try:
            obj = json.loads(body)
            scores = obj["scores"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ExternalScorerError(f"malformed scorer response: {body[:200]!r}") from None
        if not isinstance(scores, list) or len(scores) != len(pairs):
            raise ExternalScorerError(
                f"response has {len(scores) if isinstance(scores, list) else '??'} scores "
                f"for {len(pairs)} pairs"
            )
        out = []
        for s in scores:
            if not isinstance(s, (int, float)) or not math.isfinite(s) or not 0.0 <= s <= 1.0:
                raise ExternalScorerError(f"score out of range: {s!r}")
            out.append(float(s))
        return out

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Score pairs in request order; duplicates and cached pairs are not re-sent."""
        if not pairs:
            raise ExternalScorerError("empty pair batch")
        results: dict[tuple[str, str], float] = {}
        misses: list[tuple[str, str]] = []
        for pair in pairs:
            key = (pair[0], pair[1])
            if key in results:
                continue
            cached = self._cache_get(key)
            if cached is not None:
                results[key] = cached
            else:
                misses.append(key)
                results[key] = math.nan  # placeholder, keeps dedupe order
        for start in range(0, len(misses), MAX_BATCH_PAIRS):
            chunk = misses[start : start + MAX_BATCH_PAIRS]
            for key, score in zip(chunk, self._post_chunk(chunk)):
                results[key] = score
                self._cache_put(key, score)
        return [results[(p[0], p[1])] for p in pairs]

    def score_pair(self, text1: str, text2: str) -> float:
        return self.score_batch([(text1, text2)])[0]


def external_score_batch(
    endpoint: str, pairs: Sequence[tuple[str, str]], **kwargs
) -> list[float]:
    """One-shot batch scoring against an endpoint (no persistent cache)."""
    return ExternalScorer(endpoint, **kwargs).score_batch(pairs)


def _text_of(u: Utterance | str) -> str:
    return u.text if isinstance(u, Utterance) else u


def score_pair(scorer, u1: Utterance | str, u2: Utterance | str) -> float:
    """Coherence of ``(u1, u2)`` where ``u1`` is the context and ``u2`` the
    candidate next turn. Not required to be symmetric."""
    t1, t2 = _text_of(u1), _text_of(u2)
    if not t1.strip() or not t2.strip():
        raise ScoringError("cannot score an empty utterance")
    return scorer.score_pair(t1, t2)


def score_dialogue(scorer, dialogue: Dialogue) -> CoherenceProfile:
    """Score all ``k - 1`` consecutive pairs of a dialogue.

    Batching backends are driven through ``score_batch``, but the result
    equals the pairwise definition. Pairwise failures are re-raised with
    the interval index attached.
    """
    k = len(dialogue)
    if k < 2:
        raise DialogueTooShortError(
            f"dialogue {dialogue.id!r} too short to score (k={k}, need k >= 2)"
        )
    texts = [u.text for u in dialogue.utterances]
    pairs = list(zip(texts[:-1], texts[1:]))
    if hasattr(scorer, "score_batch"):
        scores = scorer.score_batch(pairs)
    else:
        scores = []
        for i, (t1, t2) in enumerate(pairs):
            try:
                scores.append(scorer.score_pair(t1, t2))
            except DialsegError as exc:
                raise ScoringError(f"{dialogue.id!r}: {exc}", interval=i) from exc
    return CoherenceProfile(dialogue_id=dialogue.id, scores=tuple(scores))
