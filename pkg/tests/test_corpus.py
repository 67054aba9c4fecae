import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialseg.corpus import (
    AnnotatedDialogue,
    Corpus,
    Dialogue,
    DialogueAct,
    Utterance,
    annotated_to_dict,
    corpus_sha256,
    parse_canonical_jsonl,
    parse_raw_dialog_corpus,
    write_canonical_jsonl,
)
from dialseg.errors import FormatError


def test_parse_raw_minimal():
    corpus = parse_raw_dialog_corpus(
        io.StringIO("Hi ! __eou__ Hello . __eou__\n"),
        io.StringIO("2 1\n"),
    )
    assert len(corpus) == 1
    d = corpus.dialogues[0]
    assert [u.text for u in d.utterances] == ["Hi !", "Hello ."]
    assert [u.act for u in d.utterances] == [DialogueAct.Question, DialogueAct.Inform]


def test_parse_raw_without_sidecars():
    corpus = parse_raw_dialog_corpus(io.StringIO("a __eou__ b __eou__\nc __eou__\n"))
    assert len(corpus) == 2
    assert corpus.dialogues[0].utterances[0].act is None
    assert corpus.dialogues[0].topic is None
    assert len({d.id for d in corpus.dialogues}) == 2


def test_parse_raw_topic_stream():
    corpus = parse_raw_dialog_corpus(
        io.StringIO("a __eou__ b __eou__\nc __eou__ d __eou__\n"),
        None,
        io.StringIO("3\n10\n"),
    )
    assert [d.topic for d in corpus.dialogues] == ["3", "10"]


def test_parse_raw_act_count_mismatch():
    with pytest.raises(FormatError, match="act labels"):
        parse_raw_dialog_corpus(io.StringIO("a __eou__ b __eou__\n"), io.StringIO("2 1 1\n"))


def test_parse_raw_unknown_act_code():
    with pytest.raises(FormatError, match="unknown act integer"):
        parse_raw_dialog_corpus(io.StringIO("a __eou__ b __eou__\n"), io.StringIO("2 5\n"))


def test_parse_raw_line_count_mismatch():
    with pytest.raises(FormatError, match="lines"):
        parse_raw_dialog_corpus(
            io.StringIO("a __eou__\nb __eou__\n"), io.StringIO("1\n")
        )
    with pytest.raises(FormatError, match="topic stream"):
        parse_raw_dialog_corpus(
            io.StringIO("a __eou__\n"), None, io.StringIO("1\n2\n")
        )


def test_parse_raw_empty_utterance_rejected():
    with pytest.raises(FormatError, match="empty utterance"):
        parse_raw_dialog_corpus(io.StringIO("a __eou__ __eou__ b __eou__\n"))


def test_parse_raw_preserves_order_and_inner_whitespace():
    corpus = parse_raw_dialog_corpus(io.StringIO("one  two __eou__ three __eou__\n"))
    assert corpus.dialogues[0].utterances[0].text == "one  two"


def test_canonical_minimal_boundary():
    items = parse_canonical_jsonl(
        io.StringIO('{"id":"d1","utterances":[{"text":"a"},{"text":"b"},{"text":"c"}],"boundaries":[0]}\n')
    )
    assert len(items) == 1
    assert items[0].boundaries == frozenset({0})
    assert items[0].dialogue.id == "d1"


def test_canonical_boundary_out_of_range():
    with pytest.raises(FormatError, match="line 1"):
        parse_canonical_jsonl(
            io.StringIO('{"id":"d2","utterances":[{"text":"a"}],"boundaries":[1]}\n')
        )


def test_canonical_boundaries_default_empty():
    items = parse_canonical_jsonl(io.StringIO('{"id":"d1","utterances":[{"text":"a"}]}\n'))
    assert items[0].boundaries == frozenset()


def test_canonical_malformed_line_number():
    stream = io.StringIO('{"id":"ok","utterances":[{"text":"a"}]}\n{oops\n')
    with pytest.raises(FormatError, match="line 2"):
        parse_canonical_jsonl(stream)


def test_canonical_unknown_act_label():
    with pytest.raises(FormatError, match="line 1"):
        parse_canonical_jsonl(
            io.StringIO('{"id":"d1","utterances":[{"text":"a","act":"Greeting"}]}\n')
        )


def _roundtrip(items):
    buf = io.StringIO()
    write_canonical_jsonl(items, buf)
    buf.seek(0)
    return parse_canonical_jsonl(buf)


def test_roundtrip_fixed():
    items = [
        AnnotatedDialogue(
            dialogue=Dialogue(
                id="d1",
                utterances=(
                    Utterance("For how long?", act=DialogueAct.Question, speaker="A"),
                    Utterance("As long as it stays valid.", act=DialogueAct.Inform, speaker="B"),
                    Utterance("Thanks — 谢谢!"),
                ),
                topic="4",
            ),
            boundaries=frozenset({1}),
        ),
        AnnotatedDialogue(dialogue=Dialogue(id="d2", utterances=(Utterance("solo"),))),
    ]
    assert _roundtrip(items) == items


# Non-whitespace alphabet keeps every draw valid (no rejection sampling).
_texts = st.text(
    alphabet=st.characters(blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Cs")),
    min_size=1,
    max_size=20,
)


@st.composite
def annotated_dialogues(draw):
    idx = draw(st.integers(0, 10**6))
    k = draw(st.integers(1, 8))
    utts = []
    for _ in range(k):
        utts.append(
            Utterance(
                draw(_texts),
                act=draw(st.sampled_from([None, *DialogueAct])),
                speaker=draw(st.sampled_from([None, "A", "B"])),
            )
        )
    boundaries = draw(st.sets(st.integers(0, k - 2), max_size=k - 1)) if k > 1 else set()
    topic = draw(st.sampled_from([None, "1", "2"]))
    return AnnotatedDialogue(
        dialogue=Dialogue(id=f"d{idx}", utterances=tuple(utts), topic=topic),
        boundaries=frozenset(boundaries),
    )


@settings(max_examples=60)
@given(st.lists(annotated_dialogues(), max_size=5))
def test_roundtrip_property(items):
    assert _roundtrip(items) == items


def test_write_deterministic_field_order():
    item = AnnotatedDialogue(
        dialogue=Dialogue(id="d1", utterances=(Utterance("a"), Utterance("b"))),
        boundaries=frozenset({0}),
    )
    buf1, buf2 = io.StringIO(), io.StringIO()
    write_canonical_jsonl([item], buf1)
    write_canonical_jsonl([item], buf2)
    assert buf1.getvalue() == buf2.getvalue()
    assert list(json.loads(buf1.getvalue()).keys()) == ["id", "utterances", "boundaries"]


def test_utterance_trimming_and_empty():
    assert Utterance("  hi  ").text == "hi"
    with pytest.raises(ValueError):
        Utterance("   ")


def test_dialogue_requires_utterances():
    with pytest.raises(ValueError):
        Dialogue(id="d", utterances=())


def test_corpus_rejects_duplicate_ids():
    d = Dialogue(id="dup", utterances=(Utterance("x"),))
    with pytest.raises(ValueError, match="duplicate"):
        Corpus(dialogues=(d, d))


def test_corpus_checksum_stable_and_content_sensitive():
    c1 = parse_raw_dialog_corpus(io.StringIO("a __eou__ b __eou__\n"))
    c2 = parse_raw_dialog_corpus(io.StringIO("a __eou__ b __eou__\n"))
    c3 = parse_raw_dialog_corpus(io.StringIO("a __eou__ c __eou__\n"))
    assert corpus_sha256(c1) == corpus_sha256(c2)
    assert corpus_sha256(c1) != corpus_sha256(c3)


def test_annotated_to_dict_sorts_boundaries():
    item = AnnotatedDialogue(
        dialogue=Dialogue(id="d", utterances=tuple(Utterance(t) for t in "abcd")),
        boundaries=frozenset({2, 0}),
    )
    assert annotated_to_dict(item)["boundaries"] == [0, 2]
