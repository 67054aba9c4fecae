import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialseg.corpus import Dialogue, Utterance
from dialseg.scorers import (
    CoherenceProfile,
    DialogueTooShortError,
    EmbeddingScorer,
    EmbeddingTable,
    ExternalScorer,
    ExternalScorerError,
    LexicalScorer,
    OOVError,
    external_score_batch,
    load_embedding_table,
    score_dialogue,
    score_pair,
)
from dialseg.errors import FormatError

from .oracles import cosine_oracle


def _dialogue(*texts, id="d"):
    return Dialogue(id=id, utterances=tuple(Utterance(t) for t in texts))


# --- lexical backend ---------------------------------------------------------


def test_lexical_identity_scores_one():
    s = LexicalScorer()
    assert s.score_pair("the same words here", "the same words here") == 1.0


def test_lexical_disjoint_scores_zero():
    s = LexicalScorer()
    assert s.score_pair("apples oranges pears", "cars trucks buses") == 0.0


def test_lexical_partial_overlap_in_between():
    s = LexicalScorer()
    v = s.score_pair("red fruit apple", "red fruit truck")
    assert 0.0 < v < 1.0


def test_lexical_ignores_case_and_punctuation():
    s = LexicalScorer()
    assert s.score_pair("Hello, World!", "hello world") == 1.0


def test_lexical_token_free_text_scores_zero():
    s = LexicalScorer()
    assert s.score_pair("!!!", "hello") == 0.0
    assert s.score_pair("?!", "...") == 0.0


@settings(max_examples=100)
@given(
    st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=8),
    st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=8),
)
def test_lexical_range_property(tokens1, tokens2):
    v = LexicalScorer().score_pair(" ".join(tokens1), " ".join(tokens2))
    assert 0.0 <= v <= 1.0


# --- embedding table loader --------------------------------------------------


def test_load_embedding_table_minimal():
    table = load_embedding_table(io.StringIO("a 1 0\nb 0 1\n"))
    assert table.dimension == 2
    assert len(table) == 2
    assert np.allclose(table.vector("a"), [1, 0])


def test_load_embedding_table_dimension_error():
    with pytest.raises(FormatError, match="line 3"):
        load_embedding_table(io.StringIO("a 1 0\nb 0 1\nc 1 0 0\n"))


def test_load_embedding_table_non_numeric():
    with pytest.raises(FormatError, match="non-numeric"):
        load_embedding_table(io.StringIO("a 1 x\n"))


def test_load_embedding_table_duplicates_last_wins():
    table = load_embedding_table(io.StringIO("a 1 0\na 0 1\n"))
    assert table.duplicates == 1
    assert np.allclose(table.vector("a"), [0, 1])


def test_load_embedding_table_empty_stream():
    with pytest.raises(FormatError):
        load_embedding_table(io.StringIO(""))


def test_embedding_table_oov_lookup_raises():
    table = load_embedding_table(io.StringIO("a 1 0\n"))
    with pytest.raises(OOVError):
        table.vector("missing")


def test_load_large_synthetic_vector_file():
    # Large-file robustness: 100k records, zero dimension errors.
    rng = np.random.default_rng(0)
    lines = [
        f"tok{i} " + " ".join(f"{x:.4f}" for x in rng.random(8)) for i in range(100_000)
    ]
    table = load_embedding_table(io.StringIO("\n".join(lines)))
    assert len(table) == 100_000
    assert table.dimension == 8
    assert table.duplicates == 0


# --- embedding backend -------------------------------------------------------


def _tiny_table():
    return load_embedding_table(
        io.StringIO("king 0.8 0.6 0.0\nqueen 0.6 0.8 0.0\ncar -0.9 0.1 0.4\n")
    )


def test_embedding_identity_scores_one():
    scorer = EmbeddingScorer(_tiny_table())
    assert scorer.score_pair("king", "king") == 1.0


def test_embedding_matches_cosine_oracle():
    # Expected value computed independently from the raw file contents.
    scorer = EmbeddingScorer(_tiny_table())
    v1 = [(0.8 + 0.6) / 2, (0.6 + 0.8) / 2, 0.0]  # mean of king, queen
    v2 = [-0.9, 0.1, 0.4]
    expected = (cosine_oracle(v1, v2) + 1.0) / 2.0
    got = scorer.score_pair("king queen", "car")
    assert got == pytest.approx(expected, abs=1e-6)
    assert 0.0 <= got <= 1.0


def test_embedding_oov_tokens_skipped():
    scorer = EmbeddingScorer(_tiny_table())
    assert scorer.score_pair("king xyzzy", "king") == 1.0
    assert scorer.oov_pairs == 0


def test_embedding_oov_only_utterance_neutral():
    scorer = EmbeddingScorer(_tiny_table())
    assert scorer.score_pair("xyzzy plugh", "king") == 0.5
    assert scorer.score_pair("king", "xyzzy") == 0.5
    assert scorer.oov_pairs == 2


def test_embedding_monotone_mapping():
    # (cos+1)/2 is strictly monotone: ordering of cosines is preserved.
    scorer = EmbeddingScorer(_tiny_table())
    close = scorer.score_pair("king", "queen")
    far = scorer.score_pair("king", "car")
    assert close > far


# --- score_pair / score_dialogue ---------------------------------------------


def test_score_pair_accepts_utterances_and_strings():
    s = LexicalScorer()
    assert score_pair(s, Utterance("a b"), Utterance("a b")) == 1.0
    assert score_pair(s, "a b", "a b") == 1.0


def test_score_dialogue_length():
    profile = score_dialogue(LexicalScorer(), _dialogue("a b", "b c", "c d"))
    assert len(profile) == 2
    assert profile.dialogue_id == "d"


def test_score_dialogue_k2():
    assert len(score_dialogue(LexicalScorer(), _dialogue("a", "b"))) == 1


def test_score_dialogue_k1_rejected():
    with pytest.raises(DialogueTooShortError, match="too short to score"):
        score_dialogue(LexicalScorer(), _dialogue("only one"))


def test_score_dialogue_two_topic_blocks():
    # u0,u1,u2 share vocabulary; u3,u4 share vocabulary; blocks disjoint.
    d = _dialogue("cat dog fish", "dog fish bird", "cat bird dog", "car bus train", "bus train bike")
    scores = score_dialogue(LexicalScorer(), d).scores
    assert scores[0] > 0.0
    assert scores[1] > 0.0
    assert scores[2] == 0.0
    assert scores[3] > 0.0


def test_score_dialogue_equals_pairwise_definition():
    d = _dialogue("a b c", "b c d", "x y", "y z a")
    scorer = LexicalScorer()
    profile = score_dialogue(scorer, d)
    for i in range(len(d) - 1):
        assert profile.scores[i] == score_pair(
            scorer, d.utterances[i], d.utterances[i + 1]
        )


def test_score_dialogue_deterministic():
    d = _dialogue("a b c", "b c d", "x y")
    scorer = LexicalScorer()
    assert score_dialogue(scorer, d) == score_dialogue(scorer, d)


def test_coherence_profile_validation():
    with pytest.raises(ValueError):
        CoherenceProfile(dialogue_id="d", scores=())
    with pytest.raises(ValueError):
        CoherenceProfile(dialogue_id="d", scores=(1.5,))
    with pytest.raises(ValueError):
        CoherenceProfile(dialogue_id="d", scores=(math.nan,))


# --- external backend: client-side validation via fake transport -------------


class FakeTransport:
    def __init__(self, responder):
        self.responder = responder
        self.calls: list[dict] = []

    def __call__(self, url, payload, timeout, headers):
        self.calls.append(payload)
        return self.responder(payload)


def _json_ok(scores):
    import json

    return 200, json.dumps({"scores": scores})


def test_external_alignment_and_order():
    transport = FakeTransport(lambda p: _json_ok([0.1 * (i + 1) for i in range(len(p["pairs"]))]))
    scorer = ExternalScorer("http://x", transport=transport)
    scores = scorer.score_batch([("a", "b"), ("c", "d"), ("e", "f")])
    assert scores == [pytest.approx(0.1), pytest.approx(0.2), pytest.approx(0.3)]


def test_external_rejects_out_of_range():
    transport = FakeTransport(lambda p: _json_ok([1.7]))
    scorer = ExternalScorer("http://x", transport=transport)
    with pytest.raises(ExternalScorerError, match="out of range"):
        scorer.score_pair("a", "b")


def test_external_rejects_length_mismatch():
    transport = FakeTransport(lambda p: _json_ok([0.5]))
    scorer = ExternalScorer("http://x", transport=transport)
    with pytest.raises(ExternalScorerError, match="scores"):
        scorer.score_batch([("a", "b"), ("c", "d")])


def test_external_rejects_malformed_response():
    transport = FakeTransport(lambda p: (200, "not json"))
    scorer = ExternalScorer("http://x", transport=transport)
    with pytest.raises(ExternalScorerError, match="malformed"):
        scorer.score_pair("a", "b")


def test_external_http_error_retryable_flag():
    scorer_500 = ExternalScorer("http://x", transport=FakeTransport(lambda p: (503, "down")))
    with pytest.raises(ExternalScorerError) as exc_info:
        scorer_500.score_pair("a", "b")
    assert exc_info.value.retryable

    scorer_400 = ExternalScorer("http://x", transport=FakeTransport(lambda p: (404, "no")))
    with pytest.raises(ExternalScorerError) as exc_info:
        scorer_400.score_pair("a", "b")
    assert not exc_info.value.retryable


def test_external_chunks_batches_of_64():
    transport = FakeTransport(lambda p: _json_ok([0.5] * len(p["pairs"])))
    scorer = ExternalScorer("http://x", transport=transport)
    pairs = [(f"u{i}", f"v{i}") for i in range(150)]
    scores = scorer.score_batch(pairs)
    assert len(scores) == 150
    assert [len(c["pairs"]) for c in transport.calls] == [64, 64, 22]


def test_external_empty_batch_rejected():
    scorer = ExternalScorer("http://x", transport=FakeTransport(lambda p: _json_ok([])))
    with pytest.raises(ExternalScorerError, match="empty"):
        scorer.score_batch([])


def test_external_cache_deduplicates_within_and_across_calls():
    transport = FakeTransport(lambda p: _json_ok([0.25] * len(p["pairs"])))
    scorer = ExternalScorer("http://x", transport=transport)
    pairs = [("a", "b"), ("a", "b"), ("c", "d")]
    first = scorer.score_batch(pairs)
    assert scorer.request_count == 1
    assert sum(len(c["pairs"]) for c in transport.calls) == 2  # deduped
    second = scorer.score_batch(pairs)
    assert scorer.request_count == 1  # fully cached
    assert first == second


def test_external_cache_eviction():
    transport = FakeTransport(lambda p: _json_ok([0.5] * len(p["pairs"])))
    scorer = ExternalScorer("http://x", transport=transport, cache_size=2)
    scorer.score_pair("a", "1")
    scorer.score_pair("b", "2")
    scorer.score_pair("c", "3")  # evicts ("a", "1")
    count = scorer.request_count
    scorer.score_pair("a", "1")
    assert scorer.request_count == count + 1


def test_external_auth_token_header():
    captured = {}

    def transport(url, payload, timeout, headers):
        captured.update(headers)
        return _json_ok([0.5])

    ExternalScorer("http://x", transport=transport, auth_token="sekrit").score_pair("a", "b")
    assert captured.get("Authorization") == "Bearer sekrit"


# --- external backend over real HTTP (stub server) ---------------------------


def test_external_scoring_over_http(stub_scorer):
    scorer = ExternalScorer(stub_scorer.url)
    score = scorer.score_pair("t00w01 t00w02", "t00w03")
    assert score == 1.0
    assert scorer.score_pair("t00w01", "t01w02") == 0.0


def test_external_cache_dialogue_scored_twice_one_round_of_requests(stub_scorer):
    scorer = ExternalScorer(stub_scorer.url)
    d = _dialogue("t00w01 t00w02", "t00w02 t00w03", "t01w01 t01w05", id="dlg")
    p1 = score_dialogue(scorer, d)
    requests_after_first = scorer.request_count
    p2 = score_dialogue(scorer, d)
    assert scorer.request_count == requests_after_first
    assert p1 == p2


def test_external_score_batch_function(stub_scorer):
    scores = external_score_batch(stub_scorer.url, [("t00w01", "t00w02"), ("t00w01", "t01w01")])
    assert scores == [1.0, 0.0]
