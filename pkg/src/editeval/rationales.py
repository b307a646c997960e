"""Edit classification and human-rationale extraction.

Two edit categories yield rationales that are both faithful (the deleted
text is the source of the error by construction) and sufficient (the deleted
words alone justify the needs-edit decision):

* spelling: every deletion is a single out-of-dictionary word immediately
  replaced by a single in-dictionary word;
* deleted: the sentence only loses text, nothing is inserted.

The rationale for either category is the set of pre-edit words that overlap
a deleted span.  Everything else (word-choice rewrites, insertions, mixed
edits) is classified ``other`` and produces no rationale, because the
deleted text alone would not justify the decision.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import (
    PLACEHOLDER_TOKENS,
    EditedSentence,
    EditSegment,
    SegmentKind,
    deleted_byte_spans,
    read_corpus,
    reconstruct_pre_edit,
)
from .errors import EmptyRationaleError

logger = logging.getLogger(__name__)

#: Characters stripped from word boundaries before dictionary lookup.
_STRIP_CHARS = ".,;:!?'\"()[]{}"


class EditType(Enum):
    SPELLING = "spelling"
    DELETED = "deleted"
    OTHER = "other"


@dataclass(frozen=True)
class HumanRationale:
    """Gold rationale for one sentence: which pre-edit words carry the edit.

    ``char_spans`` are the byte ranges of all deleted segments within the
    pre-edit text; ``word_indices`` are the pre-edit words overlapping those
    ranges on at least one non-whitespace character.
    """

    sid: str
    edit_type: EditType
    word_indices: frozenset[int]
    char_spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RationaleRecord:
    """One rationale-dataset row: the rationale plus the model input text."""

    rationale: HumanRationale
    pre_edit_text: str

    @property
    def sid(self) -> str:
        return self.rationale.sid


class Dictionary:
    """Case-insensitive word list backing the spelling-error criterion.

    Lookups normalize first (lowercase, boundary punctuation stripped);
    corpus placeholder tokens always count as correctly spelled.
    """

    def __init__(self, entries: Iterable[str], source_path: str = ""):
        self.entries = frozenset(w.lower() for w in entries if w)
        self.source_path = source_path
        if not self.entries:
            raise ValueError("dictionary has no entries")

    @classmethod
    def from_file(cls, path: str | Path) -> "Dictionary":
        """Load a plain-text word list, one word per line, ``#`` comments."""
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                word = line.split("#", 1)[0].strip()
                if word:
                    entries.append(word)
        return cls(entries, source_path=str(path))

    def contains(self, token: str) -> bool:
        if token in PLACEHOLDER_TOKENS:
            return True
        return normalize_word(token) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def normalize_word(token: str) -> str:
    """Lowercase and strip boundary punctuation for dictionary lookup."""
    return token.strip(_STRIP_CHARS).lower()


def damerau_levenshtein(a: str, b: str) -> int:
    """Edit distance counting insert, delete, substitute and transpose.

    Optimal-string-alignment variant: each substring is rearranged at most
    once, which is the usual choice for typo distance.
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (
                i > 1
                and j > 1
                and a[i - 1] == b[j - 2]
                and a[i - 2] == b[j - 1]
            ):
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def _single_word(text: str) -> str | None:
    """The span's sole word, or None if the span is empty or multi-word."""
    token = text.strip()
    if not token or any(ch.isspace() for ch in token):
        return None
    return token


@dataclass
class _ClassificationDetail:
    edit_type: EditType
    # Why a sentence with edits failed the spelling pattern; used for stats.
    reason: str = ""
    # True when only dictionary membership (not structure) blocked spelling.
    dictionary_sensitive: bool = False


def _adjacent_pairs(
    segments: tuple[EditSegment, ...],
) -> tuple[list[tuple[str, str]], int, int]:
    """Pair each deletion with its immediately-following insertion.

    Whitespace-only kept segments between the two are ignored.  Returns the
    (deleted_text, inserted_text) pairs plus counts of deletions and
    insertions left unpaired.
    """
    pairs: list[tuple[str, str]] = []
    paired_ins: set[int] = set()
    dangling_del = 0
    for i, seg in enumerate(segments):
        if seg.kind is not SegmentKind.DELETED:
            continue
        j = i + 1
        while (
            j < len(segments)
            and segments[j].kind is SegmentKind.KEPT
            and not segments[j].text.strip()
        ):
            j += 1
        if j < len(segments) and segments[j].kind is SegmentKind.INSERTED:
            pairs.append((seg.text, segments[j].text))
            paired_ins.add(j)
        else:
            dangling_del += 1
    dangling_ins = sum(
        1
        for j, seg in enumerate(segments)
        if seg.kind is SegmentKind.INSERTED and j not in paired_ins
    )
    return pairs, dangling_del, dangling_ins


def _classify_detail(
    sentence: EditedSentence,
    dictionary: Dictionary,
    max_edit_distance: int | None,
) -> _ClassificationDetail:
    kinds = [s.kind for s in sentence.segments]
    n_del = kinds.count(SegmentKind.DELETED)
    n_ins = kinds.count(SegmentKind.INSERTED)
    if n_del == 0 and n_ins == 0:
        return _ClassificationDetail(EditType.OTHER, reason="no_edit")
    if n_del > 0 and n_ins == 0:
        return _ClassificationDetail(EditType.DELETED)
    if n_del == 0:
        return _ClassificationDetail(EditType.OTHER, reason="insertion_only")

    pairs, dangling_del, dangling_ins = _adjacent_pairs(sentence.segments)
    if dangling_del or dangling_ins:
        return _ClassificationDetail(EditType.OTHER, reason="unpaired_edit")

    structure_ok = True
    dict_ok = True
    for del_text, ins_text in pairs:
        del_word = _single_word(del_text)
        ins_word = _single_word(ins_text)
        if del_word is None or ins_word is None:
            structure_ok = False
            break
        if not normalize_word(del_word) or not normalize_word(ins_word):
            structure_ok = False
            break
        if dictionary.contains(del_word) or not dictionary.contains(ins_word):
            dict_ok = False
            continue
        if max_edit_distance is not None:
            distance = damerau_levenshtein(
                normalize_word(del_word), normalize_word(ins_word)
            )
            if distance > max_edit_distance:
                dict_ok = False

    if not structure_ok:
        return _ClassificationDetail(EditType.OTHER, reason="multiword_replacement")
    if not dict_ok:
        return _ClassificationDetail(
            EditType.OTHER, reason="dictionary_mismatch", dictionary_sensitive=True
        )
    return _ClassificationDetail(EditType.SPELLING)


def classify_edit(
    sentence: EditedSentence,
    dictionary: Dictionary,
    *,
    max_edit_distance: int | None = None,
) -> EditType:
    """Classify a sentence's edits as spelling, deleted, or other.

    ``spelling`` requires every deletion to be adjacent to an insertion
    (whitespace-only kept text between them is ignored) and every such pair
    to replace one out-of-dictionary word with one in-dictionary word.
    ``deleted`` requires at least one deletion and no insertion at all.
    ``max_edit_distance``, when set, additionally caps the typo distance
    between the two words of each spelling pair.
    """
    return _classify_detail(sentence, dictionary, max_edit_distance).edit_type


def extract_rationale(sentence: EditedSentence, edit_type: EditType) -> HumanRationale:
    """Extract the rationale word set for a spelling or deleted edit.

    The char spans are the byte positions of all deleted segments within
    the pre-edit text.  A word belongs to the rationale when its span
    overlaps a deleted span; a deletion of part of a word therefore marks
    the whole containing word, since the metrics rank whole words.

    Raises:
        ValueError: ``edit_type`` is OTHER (no sufficient rationale exists).
        EmptyRationaleError: every deleted span is whitespace-only.
    """
    if edit_type is EditType.OTHER:
        raise ValueError("no rationale is defined for edit type 'other'")
    pre_edit = reconstruct_pre_edit(sentence)
    spans = deleted_byte_spans(sentence)
    indices = {
        word.index
        for word in pre_edit.words
        for start, end in spans
        if start < word.end and word.start < end
    }
    if not indices:
        raise EmptyRationaleError(
            f"{sentence.sid!r}: deleted spans cover no words"
        )
    return HumanRationale(
        sid=sentence.sid,
        edit_type=edit_type,
        word_indices=frozenset(indices),
        char_spans=tuple(spans),
    )


@dataclass
class ExtractionStats:
    """Counts from one rationale-extraction run, for the stats report."""

    n_records: int = 0
    n_parse_errors: int = 0
    n_skipped_lines: int = 0
    n_spelling: int = 0
    n_deleted: int = 0
    skipped: dict[str, int] = field(default_factory=dict)
    # Sentences whose del/ins structure matched the spelling pattern but
    # whose dictionary lookups did not; these are exactly the examples whose
    # classification can flip with a different word list.
    spelling_near_misses: int = 0
    dictionary_path: str = ""
    dictionary_size: int = 0

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1

    @property
    def n_emitted(self) -> int:
        return self.n_spelling + self.n_deleted

    def to_json_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "n_parse_errors": self.n_parse_errors,
            "n_skipped_lines": self.n_skipped_lines,
            "n_spelling": self.n_spelling,
            "n_deleted": self.n_deleted,
            "n_emitted": self.n_emitted,
            "skipped": dict(sorted(self.skipped.items())),
            "spelling_near_misses": self.spelling_near_misses,
            "dictionary_path": self.dictionary_path,
            "dictionary_size": self.dictionary_size,
        }


def build_rationale_dataset(
    corpus_path: str | Path,
    dictionary: Dictionary,
    *,
    parser_mode: str = "lenient",
    max_edit_distance: int | None = None,
    edit_types: Iterable[EditType] = (EditType.SPELLING, EditType.DELETED),
    stats: ExtractionStats | None = None,
) -> Iterator[RationaleRecord]:
    """Stream rationale records for every qualifying corpus sentence.

    Parser failures, non-qualifying edits and empty rationales are skipped
    and counted in ``stats``; output order follows corpus order.
    """
    sentences, report = read_corpus(corpus_path, parser_mode)
    if stats is not None:
        stats.n_records = report.n_records
        stats.n_parse_errors = len(report.record_errors)
        stats.n_skipped_lines = len(report.skipped_lines)
    yield from extract_from_sentences(
        sentences,
        dictionary,
        max_edit_distance=max_edit_distance,
        edit_types=edit_types,
        stats=stats,
    )


def extract_from_sentences(
    sentences: Iterable[EditedSentence],
    dictionary: Dictionary,
    *,
    max_edit_distance: int | None = None,
    edit_types: Iterable[EditType] = (EditType.SPELLING, EditType.DELETED),
    stats: ExtractionStats | None = None,
) -> Iterator[RationaleRecord]:
    """Classify and extract from parsed sentences; see the dataset builder."""
    wanted = set(edit_types)
    if stats is not None:
        stats.dictionary_path = dictionary.source_path
        stats.dictionary_size = len(dictionary)
    for sentence in sentences:
        detail = _classify_detail(sentence, dictionary, max_edit_distance)
        if stats is not None and detail.dictionary_sensitive:
            stats.spelling_near_misses += 1
        if detail.edit_type is EditType.OTHER:
            if stats is not None:
                stats.skip(detail.reason or "other")
            continue
        if detail.edit_type not in wanted:
            if stats is not None:
                stats.skip("filtered_edit_type")
            continue
        try:
            rationale = extract_rationale(sentence, detail.edit_type)
        except EmptyRationaleError as exc:
            logger.info("skipping %s: %s", sentence.sid, exc)
            if stats is not None:
                stats.skip("empty_rationale")
            continue
        if stats is not None:
            if detail.edit_type is EditType.SPELLING:
                stats.n_spelling += 1
            else:
                stats.n_deleted += 1
        yield RationaleRecord(rationale, reconstruct_pre_edit(sentence).text)


def extract_rationale_dataset(
    corpus_path: str | Path,
    dictionary: Dictionary,
    **kwargs,
) -> tuple[list[RationaleRecord], ExtractionStats]:
    """Non-streaming convenience wrapper around the dataset builder."""
    stats = ExtractionStats()
    records = list(
        build_rationale_dataset(corpus_path, dictionary, stats=stats, **kwargs)
    )
    return records, stats


# -- rationale dataset JSONL -------------------------------------------------

def rationale_record_to_json_obj(record: RationaleRecord) -> dict:
    r = record.rationale
    return {
        "sid": r.sid,
        "edit_type": r.edit_type.value,
        "pre_edit_text": record.pre_edit_text,
        "rationale_word_indices": sorted(r.word_indices),
        "rationale_char_spans": [[s, e] for s, e in r.char_spans],
    }


def rationale_record_from_json_obj(obj: dict) -> RationaleRecord:
    rationale = HumanRationale(
        sid=obj["sid"],
        edit_type=EditType(obj["edit_type"]),
        word_indices=frozenset(obj["rationale_word_indices"]),
        char_spans=tuple((s, e) for s, e in obj["rationale_char_spans"]),
    )
    return RationaleRecord(rationale, obj["pre_edit_text"])


def write_rationale_jsonl(
    records: Iterable[RationaleRecord], path: str | Path
) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(
                json.dumps(rationale_record_to_json_obj(record), ensure_ascii=False)
            )
            fh.write("\n")
            n += 1
    return n


def read_rationale_jsonl(path: str | Path) -> Iterator[RationaleRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield rationale_record_from_json_obj(json.loads(line))
