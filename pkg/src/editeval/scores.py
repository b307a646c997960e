"""Score-file ingestion, token-to-word alignment, and word rankings.

Score files are JSONL, one record per (example, model, method, layer):

    {"sid": str, "model_id": str, "method": "attention" | "grad_x_input",
     "layer": int | null, "prob_needs_edit": float,
     "tokens": [{"surface": str, "start": int | null, "end": int | null,
                 "score": float}, ...]}

Token ``start``/``end`` index bytes of the rationale dataset's
``pre_edit_text`` for the same sid; sequence-delimiter tokens carry null
offsets and never contribute to any word.  Attention scores are per-layer
sums over heads of the attention weight from the classification position to
the token, so they are non-negative; gradient-times-input scores are signed.

Aggregation sums token scores into whole-word scores and ranks words by
descending score, ties broken by ascending word index.  Rankings depend
only on score order, so any positive rescaling of a record's token scores
(for example dividing head sums by the head count) leaves the ranking and
every downstream metric unchanged.
"""

from __future__ import annotations

import json
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .corpus import PreEditSentence
from .errors import (
    MethodMismatchError,
    SchemaViolationError,
    SpanCrossesWordBoundaryError,
    SpanOutOfBoundsError,
)

logger = logging.getLogger(__name__)

METHOD_ATTENTION = "attention"
METHOD_GRADIENT = "grad_x_input"
METHODS = (METHOD_ATTENTION, METHOD_GRADIENT)

AGG_ATTENTION = "attn"
AGG_GRAD_SIGNED = "grad_signed"
AGG_GRAD_MAGNITUDE = "grad_magnitude"
AGGREGATIONS = (AGG_ATTENTION, AGG_GRAD_SIGNED, AGG_GRAD_MAGNITUDE)


@dataclass(frozen=True)
class TokenScore:
    """One subword token's score, with its byte span in the pre-edit text."""

    surface: str
    start: int | None
    end: int | None
    score: float

    @property
    def has_span(self) -> bool:
        return self.start is not None


@dataclass(frozen=True)
class ScoreRecord:
    """All token scores one model produced for one example and method."""

    sid: str
    model_id: str
    method: str
    layer: int | None
    prob_needs_edit: float
    tokens: tuple[TokenScore, ...]

    @property
    def predicted_label(self) -> bool:
        """Needs-edit prediction: probability at or above one half."""
        return self.prob_needs_edit >= 0.5


@dataclass(frozen=True)
class WordRanking:
    """Word-level relevance scores and the induced ranking.

    ``scores[i]`` is word ``i``'s aggregated score; ``order`` lists every
    word index exactly once, sorted by descending score with ties broken by
    ascending index.
    """

    sid: str
    aggregation: str
    scores: tuple[float, ...]
    order: tuple[int, ...]

    @classmethod
    def from_scores(
        cls, sid: str, aggregation: str, scores: Sequence[float]
    ) -> "WordRanking":
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        return cls(sid, aggregation, tuple(scores), tuple(order))


def align_tokens_to_words(
    tokens: Sequence[TokenScore], sentence: PreEditSentence
) -> dict[int, list[int]]:
    """Assign each span-bearing token to the word containing its span.

    Returns word index -> positions (into ``tokens``) of its tokens; every
    word of the sentence is present, possibly with an empty list.  Tokens
    without spans (sequence delimiters) are left out entirely.

    Raises:
        SpanOutOfBoundsError: a span does not fit the sentence text.
        SpanCrossesWordBoundaryError: a span overlaps inter-word whitespace
            or extends past the word containing its start.
    """
    words = sentence.words
    starts = [w.start for w in words]
    text_size = len(sentence.text.encode("utf-8"))
    mapping: dict[int, list[int]] = {w.index: [] for w in words}
    for pos, token in enumerate(tokens):
        if not token.has_span:
            continue
        start, end = token.start, token.end
        if start is None or end is None or start < 0 or end > text_size or start >= end:
            raise SpanOutOfBoundsError(
                f"token {pos} ({token.surface!r}) span ({token.start}, {token.end}) "
                f"does not fit text of {text_size} bytes"
            )
        i = bisect_right(starts, start) - 1
        word = words[i] if i >= 0 else None
        if word is None or start >= word.end:
            raise SpanCrossesWordBoundaryError(
                f"token {pos} ({token.surface!r}) starts in whitespace at byte {start}"
            )
        if end > word.end:
            raise SpanCrossesWordBoundaryError(
                f"token {pos} ({token.surface!r}) span ({start}, {end}) crosses the "
                f"boundary of word {word.index} ({word.surface!r})"
            )
        mapping[word.index].append(pos)
    return mapping


def _word_sums(
    record: ScoreRecord, sentence: PreEditSentence, absolute: bool
) -> list[float]:
    mapping = align_tokens_to_words(record.tokens, sentence)
    scores = [0.0] * len(sentence.words)
    empty = 0
    for index in range(len(scores)):
        positions = mapping[index]
        if not positions:
            empty += 1
            continue
        if absolute:
            scores[index] = sum(abs(record.tokens[p].score) for p in positions)
        else:
            scores[index] = sum(record.tokens[p].score for p in positions)
    if empty:
        logger.warning(
            "record %s (%s/%s, layer %s): %d of %d words received no tokens "
            "and score 0",
            record.sid, record.model_id, record.method, record.layer,
            empty, len(scores),
        )
    return scores


def aggregate_attention(
    record: ScoreRecord, sentence: PreEditSentence
) -> WordRanking:
    """Word ranking from an attention record: per-word token-score sums."""
    if record.method != METHOD_ATTENTION:
        raise MethodMismatchError(
            f"expected an attention record, got method {record.method!r}"
        )
    scores = _word_sums(record, sentence, absolute=False)
    return WordRanking.from_scores(record.sid, AGG_ATTENTION, scores)


def aggregate_gradient(
    record: ScoreRecord,
    sentence: PreEditSentence,
    magnitude: bool,
    *,
    magnitude_mode: str = "word",
) -> WordRanking:
    """Word ranking from a gradient-times-input record.

    Signed mode sums the signed token scores per word.  Magnitude mode
    defaults to the absolute value of that word-level sum; with
    ``magnitude_mode="token"`` it instead sums per-token absolute values.
    """
    if record.method != METHOD_GRADIENT:
        raise MethodMismatchError(
            f"expected a gradient record, got method {record.method!r}"
        )
    if magnitude_mode not in ("word", "token"):
        raise ValueError(f"unknown magnitude_mode {magnitude_mode!r}")
    if magnitude and magnitude_mode == "token":
        scores = _word_sums(record, sentence, absolute=True)
    else:
        scores = _word_sums(record, sentence, absolute=False)
        if magnitude:
            scores = [abs(s) for s in scores]
    aggregation = AGG_GRAD_MAGNITUDE if magnitude else AGG_GRAD_SIGNED
    return WordRanking.from_scores(record.sid, aggregation, scores)


# -- score-file JSONL --------------------------------------------------------

def _fail(line_no: int | None, message: str) -> SchemaViolationError:
    return SchemaViolationError(message, line_no)


def score_record_from_json_obj(obj: dict, line_no: int | None = None) -> ScoreRecord:
    """Validate one score-file object and build the record.

    Raises :class:`SchemaViolationError` describing the first violation.
    """
    if not isinstance(obj, dict):
        raise _fail(line_no, "record is not a JSON object")
    for key in ("sid", "model_id", "method", "prob_needs_edit", "tokens"):
        if key not in obj:
            raise _fail(line_no, f"missing field {key!r}")
    sid, model_id, method = obj["sid"], obj["model_id"], obj["method"]
    if not isinstance(sid, str) or not sid:
        raise _fail(line_no, "sid must be a non-empty string")
    if not isinstance(model_id, str) or not model_id:
        raise _fail(line_no, "model_id must be a non-empty string")
    if method not in METHODS:
        raise _fail(line_no, f"unknown method {method!r}")

    layer = obj.get("layer")
    if method == METHOD_ATTENTION:
        if not isinstance(layer, int) or isinstance(layer, bool) or layer < 1:
            raise _fail(
                line_no, f"attention records need an integer layer >= 1, got {layer!r}"
            )
    elif layer is not None:
        raise _fail(line_no, f"gradient records must have null layer, got {layer!r}")

    prob = obj["prob_needs_edit"]
    if isinstance(prob, bool) or not isinstance(prob, (int, float)) or not 0 <= prob <= 1:
        raise _fail(line_no, f"prob_needs_edit must be within [0, 1], got {prob!r}")

    raw_tokens = obj["tokens"]
    if not isinstance(raw_tokens, list):
        raise _fail(line_no, "tokens must be a list")
    tokens = []
    for t_pos, raw in enumerate(raw_tokens):
        if not isinstance(raw, dict):
            raise _fail(line_no, f"token {t_pos} is not an object")
        for key in ("surface", "start", "end", "score"):
            if key not in raw:
                raise _fail(line_no, f"token {t_pos} is missing field {key!r}")
        surface, start, end, score = (
            raw["surface"], raw["start"], raw["end"], raw["score"],
        )
        if not isinstance(surface, str):
            raise _fail(line_no, f"token {t_pos} surface must be a string")
        if (start is None) != (end is None):
            raise _fail(
                line_no, f"token {t_pos} must have both offsets or neither"
            )
        if start is not None:
            if not isinstance(start, int) or not isinstance(end, int):
                raise _fail(line_no, f"token {t_pos} offsets must be integers")
            if start < 0 or end <= start:
                raise _fail(
                    line_no, f"token {t_pos} has an invalid span ({start}, {end})"
                )
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise _fail(line_no, f"token {t_pos} score must be a number")
        if not math.isfinite(score):
            raise _fail(line_no, f"token {t_pos} score must be finite")
        if method == METHOD_ATTENTION and score < 0:
            raise _fail(
                line_no, f"token {t_pos} has a negative attention score {score!r}"
            )
        tokens.append(TokenScore(surface, start, end, float(score)))

    return ScoreRecord(
        sid=sid,
        model_id=model_id,
        method=method,
        layer=layer,
        prob_needs_edit=float(prob),
        tokens=tuple(tokens),
    )


def score_record_to_json_obj(record: ScoreRecord) -> dict:
    return {
        "sid": record.sid,
        "model_id": record.model_id,
        "method": record.method,
        "layer": record.layer,
        "prob_needs_edit": record.prob_needs_edit,
        "tokens": [
            {"surface": t.surface, "start": t.start, "end": t.end, "score": t.score}
            for t in record.tokens
        ],
    }


def read_score_file(
    path: str | Path,
    *,
    on_error: str = "raise",
    errors: list[SchemaViolationError] | None = None,
) -> Iterator[ScoreRecord]:
    """Stream validated records from a score file.

    ``on_error="raise"`` (default) raises :class:`SchemaViolationError` with
    the offending line number; ``on_error="skip"`` logs and drops the bad
    record instead, appending the error to ``errors`` when given.
    """
    if on_error not in ("raise", "skip"):
        raise ValueError(f"unknown on_error policy {on_error!r}")
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                try:
                    obj = json.loads(line)
                except ValueError as exc:
                    raise _fail(line_no, f"not valid JSON: {exc}") from exc
                yield score_record_from_json_obj(obj, line_no)
            except SchemaViolationError as exc:
                if on_error == "raise":
                    raise
                logger.warning("%s: dropping record: %s", path, exc)
                if errors is not None:
                    errors.append(exc)


def write_score_file(records, path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(score_record_to_json_obj(record), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n
