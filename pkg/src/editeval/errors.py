"""Exception types shared across the package.

Everything raised on purpose derives from :class:`EditEvalError`, so callers
can catch one base class at pipeline boundaries and map it to an exit code.
"""

from __future__ import annotations


class EditEvalError(Exception):
    """Base class for all errors raised by this package."""


# -- sentence markup parsing -------------------------------------------------

class CorpusParseError(EditEvalError):
    """A sentence record's markup is malformed."""


class EmptyInputError(EditEvalError):
    """An operation received no input at all (empty markup, empty stream)."""


class UnbalancedTagError(CorpusParseError):
    """A del/ins tag was opened without a close, or closed without an open."""


class NestedTagError(CorpusParseError):
    """A del/ins tag was opened inside another del/ins span."""


class EmptySpanError(CorpusParseError):
    """A del/ins pair encloses no text; edit spans must be non-empty."""


class EmptyResultError(EditEvalError):
    """A reconstructed sentence is empty or whitespace-only."""


# -- rationale extraction ----------------------------------------------------

class EmptyRationaleError(EditEvalError):
    """All deleted spans are whitespace-only, so no rationale word exists."""


# -- score files and token alignment -----------------------------------------

class SchemaViolationError(EditEvalError):
    """A score-file record does not satisfy the JSONL schema."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class AlignmentError(EditEvalError):
    """A token's character span cannot be assigned to a word."""


class SpanOutOfBoundsError(AlignmentError):
    """A token span lies outside the sentence text."""


class SpanCrossesWordBoundaryError(AlignmentError):
    """A token span overlaps whitespace or straddles two words."""


class MethodMismatchError(EditEvalError):
    """A score record was fed to the aggregator for a different method."""


# -- metrics and analysis ----------------------------------------------------

class RationaleNotInRankingError(EditEvalError):
    """A rationale word index does not appear in the ranking's order."""


class MismatchedExampleSetsError(EditEvalError):
    """Grouped results were computed over different example sets."""


class MissingLayerError(EditEvalError):
    """A layer sweep requires contiguous layers 1..L and one is absent."""
