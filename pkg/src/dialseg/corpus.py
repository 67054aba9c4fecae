"""Dialogue corpus types and parsers.

Two on-disk formats are supported:

* the raw distribution format: one dialogue per line with utterances
  separated by the literal token ``__eou__``, plus optional sidecar files
  carrying one line of space-separated act codes per dialogue and one
  integer topic id per line;
* a canonical JSONL interchange format, one dialogue per line::

      {"id": "d1",
       "utterances": [{"text": "...", "act": "Question", "speaker": "A"}],
       "topic": "3",
       "boundaries": [1, 4]}

  ``boundaries`` holds interval indices: index ``i`` marks a topic boundary
  between utterance ``i`` and ``i+1``, so valid values are ``0..k-2`` for a
  dialogue of ``k`` utterances.

All parsed objects are immutable and safe to share across threads.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import FormatError


class DialogueAct(enum.Enum):
    """Closed set of utterance-level dialogue acts."""

    Inform = "Inform"
    Question = "Question"
    Directive = "Directive"
    Commissive = "Commissive"

    @classmethod
    def from_label(cls, label: str) -> "DialogueAct":
        try:
            return cls(label)
        except ValueError:
            raise FormatError(f"unknown dialogue act label {label!r}") from None

    @classmethod
    def from_code(cls, code: int) -> "DialogueAct":
        try:
            return _ACT_CODES[code]
        except KeyError:
            raise FormatError(f"unknown act integer {code}") from None


# Raw-distribution convention: the act sidecar encodes acts as integers 1-4.
_ACT_CODES = {
    1: DialogueAct.Inform,
    2: DialogueAct.Question,
    3: DialogueAct.Directive,
    4: DialogueAct.Commissive,
}


@dataclass(frozen=True)
class Utterance:
    """A single dialogue turn. Text is trimmed at the edges, never empty."""

    text: str
    act: DialogueAct | None = None
    speaker: str | None = None

    def __post_init__(self):
        trimmed = self.text.strip()
        if not trimmed:
            raise ValueError("utterance text is empty after trimming")
        object.__setattr__(self, "text", trimmed)


@dataclass(frozen=True)
class Dialogue:
    """An ordered utterance sequence with an optional topic label."""

    id: str
    utterances: tuple[Utterance, ...]
    topic: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if len(self.utterances) < 1:
            raise ValueError(f"dialogue {self.id!r} has no utterances")

    def __len__(self) -> int:
        return len(self.utterances)


@dataclass(frozen=True)
class AnnotatedDialogue:
    """A dialogue plus its gold topic-boundary set.

    Boundary ``i`` means a topic boundary between utterance ``i`` and
    ``i+1``; the set may be empty.
    """

    dialogue: Dialogue
    boundaries: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "boundaries", frozenset(self.boundaries))
        k = len(self.dialogue)
        for b in self.boundaries:
            if not isinstance(b, int) or b < 0 or b >= k - 1:
                raise ValueError(
                    f"dialogue {self.dialogue.id!r}: boundary index {b} out of "
                    f"range for {k} utterances (valid: 0..{k - 2})"
                )

    @property
    def id(self) -> str:
        return self.dialogue.id


@dataclass(frozen=True)
class Corpus:
    """A named collection of dialogues with unique ids."""

    dialogues: tuple[Dialogue, ...]
    name: str = "corpus"
    language: str = "und"

    def __post_init__(self):
        object.__setattr__(self, "dialogues", tuple(self.dialogues))
        seen: set[str] = set()
        for d in self.dialogues:
            if d.id in seen:
                raise ValueError(f"duplicate dialogue id {d.id!r} in corpus {self.name!r}")
            seen.add(d.id)

    def __len__(self) -> int:
        return len(self.dialogues)


def _read_stream_lines(stream: Iterable[str]) -> list[str]:
    """All lines without trailing newlines; trailing blank lines dropped."""
    lines = [line.rstrip("\r\n") for line in stream]
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def parse_raw_dialog_corpus(
    text_stream: Iterable[str],
    act_stream: Iterable[str] | None = None,
    topic_stream: Iterable[str] | None = None,
    *,
    name: str = "raw",
    language: str = "und",
) -> Corpus:
    """Parse the raw ``__eou__``-delimited distribution format.

    ``text_stream`` holds one dialogue per line, utterances separated by the
    literal token ``__eou__`` (a trailing separator is permitted). When
    given, ``act_stream`` must have the same line count, each line holding
    one integer code (1=Inform, 2=Question, 3=Directive, 4=Commissive) per
    utterance; ``topic_stream`` must have one integer topic id per line.

    Raises FormatError on line-count mismatches between streams, act-count
    vs utterance-count mismatches, unknown act codes, and empty utterances.
    """
    text_lines = _read_stream_lines(text_stream)
    act_lines = _read_stream_lines(act_stream) if act_stream is not None else None
    topic_lines = _read_stream_lines(topic_stream) if topic_stream is not None else None

    if act_lines is not None and len(act_lines) != len(text_lines):
        raise FormatError(
            f"act stream has {len(act_lines)} lines but text stream has {len(text_lines)}"
        )
    if topic_lines is not None and len(topic_lines) != len(text_lines):
        raise FormatError(
            f"topic stream has {len(topic_lines)} lines but text stream has {len(text_lines)}"
        )

    width = max(5, len(str(len(text_lines))))
    dialogues = []
    for lineno, line in enumerate(text_lines, 1):
        parts = line.split("__eou__")
        if parts and not parts[-1].strip():
            parts.pop()  # trailing separator, not an empty utterance
        texts = [p.strip() for p in parts]
        if not texts:
            raise FormatError("dialogue has no utterances", line=lineno)
        for t in texts:
            if not t:
                raise FormatError("empty utterance", line=lineno)

        acts: list[DialogueAct | None]
        if act_lines is not None:
            fields = act_lines[lineno - 1].split()
            if len(fields) != len(texts):
                raise FormatError(
                    f"{len(fields)} act labels for {len(texts)} utterances",
                    line=lineno,
                )
            try:
                codes = [int(f) for f in fields]
            except ValueError:
                raise FormatError(
                    f"non-integer act code in {act_lines[lineno - 1]!r}", line=lineno
                ) from None
            try:
                acts = [DialogueAct.from_code(c) for c in codes]
            except FormatError as exc:
                raise FormatError(str(exc), line=lineno) from None
        else:
            acts = [None] * len(texts)

        topic = None
        if topic_lines is not None:
            raw_topic = topic_lines[lineno - 1].strip()
            try:
                topic = str(int(raw_topic))
            except ValueError:
                raise FormatError(f"non-integer topic id {raw_topic!r}", line=lineno) from None

        utterances = tuple(Utterance(text=t, act=a) for t, a in zip(texts, acts))
        dialogues.append(Dialogue(id=f"{name}-{lineno:0{width}d}", utterances=utterances, topic=topic))

    return Corpus(dialogues=tuple(dialogues), name=name, language=language)


def _utterance_to_dict(u: Utterance) -> dict:
    d: dict = {"text": u.text}
    if u.act is not None:
        d["act"] = u.act.value
    if u.speaker is not None:
        d["speaker"] = u.speaker
    return d


def annotated_to_dict(item: AnnotatedDialogue) -> dict:
    """Canonical JSON object for one annotated dialogue (stable field order)."""
    d: dict = {
        "id": item.dialogue.id,
        "utterances": [_utterance_to_dict(u) for u in item.dialogue.utterances],
    }
    if item.dialogue.topic is not None:
        d["topic"] = item.dialogue.topic
    d["boundaries"] = sorted(item.boundaries)
    return d


def annotated_from_dict(obj: dict, line: int | None = None) -> AnnotatedDialogue:
    try:
        utts = []
        for u in obj["utterances"]:
            act = DialogueAct.from_label(u["act"]) if u.get("act") is not None else None
            utts.append(Utterance(text=u["text"], act=act, speaker=u.get("speaker")))
        dialogue = Dialogue(id=obj["id"], utterances=tuple(utts), topic=obj.get("topic"))
        return AnnotatedDialogue(dialogue=dialogue, boundaries=frozenset(obj.get("boundaries") or ()))
    except FormatError as exc:
        raise FormatError(str(exc), line=line) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(str(exc), line=line) from None


def parse_canonical_jsonl(stream: Iterable[str]) -> list[AnnotatedDialogue]:
    """Parse canonical JSONL; blank lines are ignored.

    Raises FormatError with the 1-based line number on malformed JSON,
    schema violations, and out-of-range boundary indices.
    """
    items = []
    for lineno, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed JSON ({exc.msg})", line=lineno) from None
        items.append(annotated_from_dict(obj, line=lineno))
    return items


def write_canonical_jsonl(items: Iterable[AnnotatedDialogue], stream: IO[str]) -> None:
    """Write canonical JSONL, one dialogue per line, UTF-8/LF, stable field order."""
    for item in items:
        stream.write(json.dumps(annotated_to_dict(item), ensure_ascii=False))
        stream.write("\n")


def corpus_sha256(corpus: Corpus) -> str:
    """Stable content checksum of a corpus (id, text, acts, topics)."""
    h = hashlib.sha256()
    for d in corpus.dialogues:
        record = {
            "id": d.id,
            "topic": d.topic,
            "utterances": [_utterance_to_dict(u) for u in d.utterances],
        }
        h.update(json.dumps(record, ensure_ascii=False, sort_keys=True).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
