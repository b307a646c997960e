"""Parsing of edit-markup sentence records and sentence reconstruction.

A corpus record is one sentence whose edits are marked inline with
``<del>...</del>`` (text the editor removed) and ``<ins>...</ins>`` (text the
editor added).  Everything outside those tags was kept as-is.  This module
turns a record into an ordered segment sequence, recovers the sentence as it
looked *before* editing (kept + deleted text, the model's input) and *after*
editing (kept + inserted text), and segments the pre-edit text into
whitespace-delimited words with byte-offset spans.

Two corpus readers are provided: a lenient line-oriented reader that skips
unparseable lines while counting them, and a strict reader that requires the
whole file to be well-formed XML.  Both hand the raw inner markup of each
``<sentence sid="...">`` element to :func:`parse_sentence`, so serialization
round-trips byte-for-byte regardless of the reader.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import (
    CorpusParseError,
    EmptyInputError,
    EmptyResultError,
    EmptySpanError,
    NestedTagError,
    UnbalancedTagError,
)

logger = logging.getLogger(__name__)

#: Corpus placeholder tokens standing in for stripped LaTeX constructs.
#: They are ordinary words to this module; other modules special-case them.
PLACEHOLDER_TOKENS = frozenset({"_MATH_", "_MATHDISP_", "_CITE_", "_REF_"})


class SegmentKind(Enum):
    """What the editor did with a span of text."""

    KEPT = "kept"
    DELETED = "del"
    INSERTED = "ins"


_TAG_BY_KIND = {SegmentKind.DELETED: "del", SegmentKind.INSERTED: "ins"}
_TAG_RE = re.compile(r"</?(?:del|ins)>")
_SENTENCE_RE = re.compile(
    r'<sentence\b[^>]*\bsid="([^"]*)"[^>]*>(.*?)</sentence>', re.DOTALL
)


@dataclass(frozen=True)
class EditSegment:
    """A maximal run of same-kind text inside one sentence record."""

    kind: SegmentKind
    text: str


@dataclass(frozen=True)
class EditedSentence:
    """One aligned sentence: its id and ordered edit segments.

    Invariants (enforced at construction): no two adjacent segments share a
    kind, deleted/inserted texts are non-empty, kept texts are non-empty
    except at the sequence boundaries, and no text contains markup tags.
    """

    sid: str
    segments: tuple[EditSegment, ...]

    def __post_init__(self) -> None:
        last = len(self.segments) - 1
        for i, seg in enumerate(self.segments):
            if _TAG_RE.search(seg.text):
                raise CorpusParseError(
                    f"segment text contains markup tags: {seg.text!r}"
                )
            if not seg.text:
                if seg.kind is not SegmentKind.KEPT or i not in (0, last):
                    raise CorpusParseError(
                        "empty segment text outside a kept boundary segment"
                    )
            if i > 0 and seg.kind is self.segments[i - 1].kind:
                raise CorpusParseError(
                    f"adjacent segments share kind {seg.kind.value!r}"
                )

    def to_markup(self) -> str:
        """Serialize back to inline markup.

        Inverse of :func:`parse_sentence` for canonical markup (markup with
        no immediately-adjacent same-kind tag pairs, which parsing merges).
        """
        parts = []
        for seg in self.segments:
            if seg.kind is SegmentKind.KEPT:
                parts.append(seg.text)
            else:
                tag = _TAG_BY_KIND[seg.kind]
                parts.append(f"<{tag}>{seg.text}</{tag}>")
        return "".join(parts)

    @property
    def has_edits(self) -> bool:
        return any(s.kind is not SegmentKind.KEPT for s in self.segments)


@dataclass(frozen=True)
class Word:
    """A whitespace-delimited word with its byte span in the sentence."""

    index: int
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class PreEditSentence:
    """The sentence as the model sees it, with word-level byte spans.

    ``start``/``end`` index the UTF-8 encoding of ``text``; for ASCII text
    they coincide with character offsets.  Words are the maximal runs of
    non-whitespace characters, in order, with non-overlapping spans.
    """

    text: str
    words: tuple[Word, ...]


def parse_sentence(raw_markup: str, sid: str = "") -> EditedSentence:
    """Parse one sentence record's inline markup into segments.

    Only the four literal tags ``<del>``, ``</del>``, ``<ins>``, ``</ins>``
    are special; everything else, including whitespace, is preserved
    verbatim in segment text.  Adjacent same-kind segments (possible only
    via inputs like ``</del><del>``) are merged.

    Raises:
        EmptyInputError: ``raw_markup`` is the empty string.
        UnbalancedTagError: a close without an open, a mismatched close, or
            an open tag left unclosed at the end of input.
        NestedTagError: an open tag inside an already-open span.
        EmptySpanError: a del/ins pair enclosing no text.
    """
    if raw_markup == "":
        raise EmptyInputError("empty sentence record")

    segments: list[EditSegment] = []
    mode: SegmentKind | None = None
    pos = 0
    for match in _TAG_RE.finditer(raw_markup):
        chunk = raw_markup[pos : match.start()]
        tag = match.group()
        closing = tag.startswith("</")
        kind = SegmentKind.DELETED if "del" in tag else SegmentKind.INSERTED
        if not closing:
            if mode is not None:
                raise NestedTagError(
                    f"<{_TAG_BY_KIND[kind]}> opened inside "
                    f"<{_TAG_BY_KIND[mode]}> at offset {match.start()}"
                )
            if chunk:
                segments.append(EditSegment(SegmentKind.KEPT, chunk))
            mode = kind
        else:
            if mode is None:
                raise UnbalancedTagError(
                    f"{tag} at offset {match.start()} has no matching open tag"
                )
            if mode is not kind:
                raise UnbalancedTagError(
                    f"{tag} at offset {match.start()} closes an open "
                    f"<{_TAG_BY_KIND[mode]}>"
                )
            if not chunk:
                raise EmptySpanError(
                    f"empty <{_TAG_BY_KIND[kind]}> span at offset {match.start()}"
                )
            segments.append(EditSegment(kind, chunk))
            mode = None
        pos = match.end()

    if mode is not None:
        raise UnbalancedTagError(f"<{_TAG_BY_KIND[mode]}> is never closed")
    tail = raw_markup[pos:]
    if tail:
        segments.append(EditSegment(SegmentKind.KEPT, tail))

    return EditedSentence(sid, tuple(_merge_adjacent(segments)))


def _merge_adjacent(segments: Iterable[EditSegment]) -> list[EditSegment]:
    merged: list[EditSegment] = []
    for seg in segments:
        if merged and merged[-1].kind is seg.kind:
            merged[-1] = EditSegment(seg.kind, merged[-1].text + seg.text)
        else:
            merged.append(seg)
    return merged


def _segment_words(text: str) -> tuple[Word, ...]:
    """Segment ``text`` into maximal non-whitespace runs with byte spans."""
    words: list[Word] = []
    byte_pos = 0
    start = 0
    chars: list[str] = []
    for ch in text:
        if ch.isspace():
            if chars:
                words.append(Word(len(words), start, byte_pos, "".join(chars)))
                chars = []
        else:
            if not chars:
                start = byte_pos
            chars.append(ch)
        byte_pos += len(ch.encode("utf-8"))
    if chars:
        words.append(Word(len(words), start, byte_pos, "".join(chars)))
    return tuple(words)


def pre_edit_from_text(text: str) -> PreEditSentence:
    """Segment already-reconstructed pre-edit text into words.

    Used when the pre-edit text was stored in a file; identical word spans
    to :func:`reconstruct_pre_edit` on the originating sentence.

    Raises:
        EmptyResultError: the text is empty or all whitespace.
    """
    words = _segment_words(text)
    if not words:
        raise EmptyResultError("pre-edit text has no words")
    return PreEditSentence(text, words)


def reconstruct_pre_edit(sentence: EditedSentence) -> PreEditSentence:
    """Rebuild the sentence before editing: kept + deleted text, in order.

    Reconstruction is raw concatenation; spacing is carried inside the
    segment texts and never re-derived.

    Raises:
        EmptyResultError: the pre-edit text is empty or all whitespace.
    """
    text = "".join(
        s.text for s in sentence.segments if s.kind is not SegmentKind.INSERTED
    )
    try:
        return pre_edit_from_text(text)
    except EmptyResultError:
        raise EmptyResultError(
            f"pre-edit text of {sentence.sid!r} has no words"
        ) from None


def reconstruct_post_edit(sentence: EditedSentence) -> str:
    """Rebuild the sentence after editing: kept + inserted text, in order.

    Raises:
        EmptyResultError: the post-edit text is empty or all whitespace.
    """
    text = "".join(
        s.text for s in sentence.segments if s.kind is not SegmentKind.DELETED
    )
    if not text.strip():
        raise EmptyResultError(
            f"post-edit text of {sentence.sid!r} is empty"
        )
    return text


def deleted_byte_spans(sentence: EditedSentence) -> list[tuple[int, int]]:
    """Byte spans of every deleted segment within the pre-edit text."""
    spans: list[tuple[int, int]] = []
    byte_pos = 0
    for seg in sentence.segments:
        if seg.kind is SegmentKind.INSERTED:
            continue
        length = len(seg.text.encode("utf-8"))
        if seg.kind is SegmentKind.DELETED:
            spans.append((byte_pos, byte_pos + length))
        byte_pos += length
    return spans


# -- corpus readers ----------------------------------------------------------

@dataclass(frozen=True)
class RawRecord:
    """A located-but-unparsed sentence record."""

    sid: str
    markup: str
    line_no: int | None = None


@dataclass
class ParseReport:
    """What a reader skipped or rejected, by line number."""

    n_records: int = 0
    skipped_lines: list[tuple[int, str]] = field(default_factory=list)
    record_errors: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "n_skipped_lines": len(self.skipped_lines),
            "skipped_lines": [
                {"line": ln, "reason": reason} for ln, reason in self.skipped_lines
            ],
            "n_record_errors": len(self.record_errors),
            "record_errors": self.record_errors,
        }


def iter_raw_records(
    path: str | Path,
    mode: str = "lenient",
    report: ParseReport | None = None,
) -> Iterator[RawRecord]:
    """Yield raw sentence records from a corpus file.

    ``mode="lenient"`` scans line by line, skipping lines that do not contain
    a ``<sentence sid="...">...</sentence>`` record (skips are counted in
    ``report``).  ``mode="strict"`` first requires the whole file to parse as
    XML (a missing single root is tolerated) and raises
    :class:`CorpusParseError` otherwise; records may then span lines.
    """
    if mode not in ("lenient", "strict"):
        raise ValueError(f"unknown reader mode {mode!r}")
    path = Path(path)
    content = path.read_text(encoding="utf-8")
    if mode == "strict":
        _require_well_formed_xml(content, path)
        for match in _SENTENCE_RE.finditer(content):
            if report is not None:
                report.n_records += 1
            yield RawRecord(match.group(1), match.group(2))
        return

    for line_no, line in enumerate(content.splitlines(), 1):
        if not line.strip():
            continue
        match = _SENTENCE_RE.search(line)
        if match is None:
            if report is not None:
                report.skipped_lines.append((line_no, "no sentence record"))
            continue
        if report is not None:
            report.n_records += 1
        yield RawRecord(match.group(1), match.group(2), line_no)


def _require_well_formed_xml(content: str, path: Path) -> None:
    try:
        ET.fromstring(content)
        return
    except ET.ParseError as first_error:
        # A record-per-line corpus has no single root; retry wrapped.
        try:
            ET.fromstring(f"<root>\n{content}\n</root>")
            return
        except ET.ParseError:
            raise CorpusParseError(
                f"{path}: not well-formed XML ({first_error})"
            ) from first_error


def read_corpus(
    path: str | Path, mode: str = "lenient"
) -> tuple[list[EditedSentence], ParseReport]:
    """Read and parse a corpus file, collecting per-record errors.

    Records whose markup fails to parse are skipped and recorded in the
    report with their line number (lenient mode) or sid.
    """
    report = ParseReport()
    sentences: list[EditedSentence] = []
    for raw in iter_raw_records(path, mode, report):
        try:
            sentences.append(parse_sentence(raw.markup, raw.sid))
        except (CorpusParseError, EmptyInputError) as exc:
            logger.warning("skipping record %r: %s", raw.sid, exc)
            report.record_errors.append(
                {
                    "sid": raw.sid,
                    "line": raw.line_no,
                    "error": type(exc).__name__,
                    "message": str(exc),
                }
            )
    return sentences, report


# -- canonical JSONL ---------------------------------------------------------

def sentence_to_json_obj(sentence: EditedSentence) -> dict:
    return {
        "sid": sentence.sid,
        "segments": [
            {"kind": s.kind.value, "text": s.text} for s in sentence.segments
        ],
    }


def sentence_from_json_obj(obj: dict) -> EditedSentence:
    segments = tuple(
        EditSegment(SegmentKind(s["kind"]), s["text"]) for s in obj["segments"]
    )
    return EditedSentence(obj["sid"], segments)


def write_canonical_jsonl(
    sentences: Iterable[EditedSentence], path: str | Path
) -> int:
    """Write sentences as canonical JSONL; returns the record count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in sentences:
            fh.write(json.dumps(sentence_to_json_obj(sentence), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_canonical_jsonl(path: str | Path) -> Iterator[EditedSentence]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield sentence_from_json_obj(json.loads(line))
            except (KeyError, ValueError) as exc:
                raise CorpusParseError(
                    f"{path}: bad canonical record at line {line_no}: {exc}"
                ) from exc
