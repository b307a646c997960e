"""Tools for mining human edit rationales from sentence-editing markup and
scoring how plausibly model token attributions recover them."""

import logging

from .analysis import (
    ComparisonRow,
    ConfidenceReport,
    LayerSweep,
    compare,
    confidence_correlation,
    is_attended,
    layer_sweep,
)
from .corpus import (
    EditedSentence,
    EditSegment,
    PreEditSentence,
    SegmentKind,
    Word,
    parse_sentence,
    read_corpus,
    reconstruct_post_edit,
    reconstruct_pre_edit,
)
from .errors import EditEvalError
from .metrics import (
    AggregateMetrics,
    ExampleMetrics,
    aggregate,
    auprc,
    evaluate_example,
    reciprocal_rank,
    top1_match,
)
from .rationales import (
    Dictionary,
    EditType,
    HumanRationale,
    classify_edit,
    extract_rationale,
    extract_rationale_dataset,
)
from .scores import (
    ScoreRecord,
    TokenScore,
    WordRanking,
    aggregate_attention,
    aggregate_gradient,
    align_tokens_to_words,
    read_score_file,
)

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "AggregateMetrics",
    "ComparisonRow",
    "ConfidenceReport",
    "Dictionary",
    "EditEvalError",
    "EditSegment",
    "EditType",
    "EditedSentence",
    "ExampleMetrics",
    "HumanRationale",
    "LayerSweep",
    "PreEditSentence",
    "ScoreRecord",
    "SegmentKind",
    "TokenScore",
    "Word",
    "WordRanking",
    "aggregate",
    "aggregate_attention",
    "aggregate_gradient",
    "align_tokens_to_words",
    "auprc",
    "classify_edit",
    "compare",
    "confidence_correlation",
    "evaluate_example",
    "extract_rationale",
    "extract_rationale_dataset",
    "is_attended",
    "layer_sweep",
    "parse_sentence",
    "read_corpus",
    "read_score_file",
    "reciprocal_rank",
    "reconstruct_post_edit",
    "reconstruct_pre_edit",
    "top1_match",
]
