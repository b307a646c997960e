"""Dump per-token attribution scores from BERT-style edit classifiers.

Writes score files for the evaluation toolkit: one JSON object per
(sentence, method, layer) carrying token surfaces, byte offsets into the
pre-edit text, and scores.  Also hosts the small-scale fine-tuning that
produces the classifiers in the first place.
"""

import logging

from .attribution import GRAD_TARGETS, grad_x_input, head_summed_cls_attention
from .dumping import (
    METHOD_ATTENTION,
    METHOD_GRADIENT,
    METHODS,
    DumpReport,
    DumpSpec,
    dump_scores,
    resolve_layers,
)
from .errors import DumpError
from .modeling import (
    PLACEHOLDER_TOKENS,
    Classifier,
    EncodedExample,
    encode_example,
    load_checkpoint,
)
from .records import (
    RationaleExample,
    ScoreWriter,
    read_rationale_dataset,
    score_record,
)
from .training import (
    FinetuneConfig,
    FinetuneReport,
    LabeledSentence,
    finetune_small,
    read_labeled_corpus,
)

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "Classifier",
    "DumpError",
    "DumpReport",
    "DumpSpec",
    "EncodedExample",
    "FinetuneConfig",
    "FinetuneReport",
    "GRAD_TARGETS",
    "LabeledSentence",
    "METHODS",
    "METHOD_ATTENTION",
    "METHOD_GRADIENT",
    "PLACEHOLDER_TOKENS",
    "RationaleExample",
    "ScoreWriter",
    "dump_scores",
    "encode_example",
    "finetune_small",
    "grad_x_input",
    "head_summed_cls_attention",
    "load_checkpoint",
    "read_labeled_corpus",
    "read_rationale_dataset",
    "resolve_layers",
    "score_record",
]
