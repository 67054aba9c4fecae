import pytest
import torch

from coherence_scorer.data import Vocab
from coherence_scorer.model import (
    CoherenceCrossEncoder,
    ModelConfig,
    collate_pairs,
    encode_pair,
    margin_ranking_loss,
)


@pytest.fixture
def vocab():
    return Vocab.build(["alpha beta gamma delta epsilon zeta eta theta"])


def test_encode_pair_layout(vocab):
    ids, segments = encode_pair(vocab, "alpha beta", "gamma", max_len=32)
    assert ids[0] == vocab.cls_id
    assert ids.count(vocab.sep_id) == 2
    assert ids[-1] == vocab.sep_id
    sep_first = ids.index(vocab.sep_id)
    assert sep_first == 3  # [CLS] alpha beta [SEP]
    assert segments == [0, 0, 0, 0, 1, 1]
    assert len(ids) == len(segments)


def test_encode_pair_truncates_candidate_tail_first(vocab):
    ids, segments = encode_pair(vocab, "alpha beta", "gamma delta epsilon zeta", max_len=7)
    # 2 + 4 + 3 = 9 tokens before truncation; candidate loses its tail.
    assert len(ids) == 7
    assert ids.count(vocab.sep_id) == 2
    assert ids[0] == vocab.cls_id
    s_tokens = ids[1 : ids.index(vocab.sep_id)]
    assert s_tokens == vocab.encode("alpha beta")  # context intact
    assert segments.count(1) == 3  # two candidate tokens + final separator


def test_encode_pair_truncates_context_only_when_needed(vocab):
    ids, _ = encode_pair(vocab, "alpha beta gamma delta epsilon", "zeta", max_len=5)
    assert len(ids) == 5
    assert ids.count(vocab.sep_id) == 2  # separators survive any truncation
    assert ids[0] == vocab.cls_id


def test_encode_pair_rejects_empty(vocab):
    with pytest.raises(ValueError):
        encode_pair(vocab, "", "x", max_len=8)


def test_encode_deterministic(vocab):
    a = encode_pair(vocab, "alpha beta", "gamma delta", max_len=16)
    b = encode_pair(vocab, "alpha beta", "gamma delta", max_len=16)
    assert a == b


def test_scores_finite_in_unit_interval(vocab):
    torch.manual_seed(0)
    model = CoherenceCrossEncoder(ModelConfig(vocab_size=len(vocab), d_model=32, n_layers=1))
    model.eval()
    pairs = [("alpha beta gamma", "delta epsilon"), ("zeta", "eta theta"), ("alpha", "alpha")]
    with torch.no_grad():
        ids, segments, mask = collate_pairs(vocab, pairs, 32, torch.device("cpu"))
        scores = model(ids, segments, mask)
    assert scores.shape == (3,)
    assert torch.isfinite(scores).all()
    assert ((scores >= 0) & (scores <= 1)).all()


def test_untrained_head_deterministic_under_seed(vocab):
    def fresh_scores():
        torch.manual_seed(1234)
        model = CoherenceCrossEncoder(ModelConfig(vocab_size=len(vocab), d_model=32, n_layers=1))
        model.eval()
        with torch.no_grad():
            ids, segments, mask = collate_pairs(vocab, [("alpha beta", "gamma")], 32, torch.device("cpu"))
            return model(ids, segments, mask)

    assert torch.equal(fresh_scores(), fresh_scores())


def test_loss_worked_example_exact():
    # Single pair, scores (0.2, 0.9), margin 1 -> max(0, 1 + 0.9 - 0.2) = 1.7.
    loss = margin_ranking_loss(torch.tensor([0.2]), torch.tensor([0.9]), margin=1.0)
    assert loss.item() == pytest.approx(1.7, abs=1e-7)


def test_loss_saturated_batch_zero():
    pos = torch.tensor([0.9, 0.8, 1.0])
    neg = torch.tensor([0.1, 0.2, 0.3])
    assert margin_ranking_loss(pos, neg, margin=0.5).item() == 0.0


def test_loss_mean_over_pairs():
    pos = torch.tensor([0.2, 0.9])
    neg = torch.tensor([0.9, 0.1])
    # Terms: 1.7 and max(0, 1 - 0.8) = 0.2 -> mean 0.95.
    assert margin_ranking_loss(pos, neg, margin=1.0).item() == pytest.approx(0.95, abs=1e-7)
