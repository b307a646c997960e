"""Plausibility metrics scoring word rankings against human rationales.

All three metrics read a ranking (word indices, best first) and a rationale
(set of word indices).  Reciprocal rank removes each rationale word from the
ranking once found, so later rationale words are ranked within a shorter
list; without removal, a two-word rationale occupying the top two positions
would average rank 1.5 instead of the perfect 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    AlignmentError,
    EmptyInputError,
    RationaleNotInRankingError,
)
from .rationales import HumanRationale
from .scores import ScoreRecord, WordRanking

logger = logging.getLogger(__name__)


def _check_rationale(order: Sequence[int], rationale: frozenset[int] | set[int]):
    if not rationale:
        raise RationaleNotInRankingError("rationale is empty")
    missing = set(rationale) - set(order)
    if missing:
        raise RationaleNotInRankingError(
            f"rationale words {sorted(missing)} are absent from the ranking"
        )


def reciprocal_rank(order: Sequence[int], rationale: Iterable[int]) -> float:
    """Mean-removed reciprocal rank of the rationale words in ``order``.

    The i-th rationale word found (1-based position ``p``) is recorded at
    rank ``p - (i - 1)``, as if the earlier rationale words had been removed
    from the list before ranking it.  The result is the reciprocal of the
    mean recorded rank.

    >>> reciprocal_rank([2, 3, 0, 1, 4], {2, 3})
    1.0
    >>> reciprocal_rank([0, 3, 1, 2, 4], {2, 3})
    0.4
    """
    rationale = frozenset(rationale)
    _check_rationale(order, rationale)
    ranks = []
    for position, index in enumerate(order, 1):
        if index in rationale:
            ranks.append(position - len(ranks))
    return len(ranks) / sum(ranks)


def auprc(order: Sequence[int], rationale: Iterable[int]) -> float:
    """Area under the precision-recall curve for ranking the rationale.

    Equal to average precision: the mean, over rationale words, of the
    precision of the ranking prefix ending at that word.

    >>> auprc([2, 3, 0, 1, 4], {2, 3})
    1.0
    >>> auprc([0, 2, 1, 3, 4], {2, 3})
    0.5
    """
    rationale = frozenset(rationale)
    _check_rationale(order, rationale)
    hits = 0
    total = 0.0
    for position, index in enumerate(order, 1):
        if index in rationale:
            hits += 1
            total += hits / position
    return total / hits


def top1_match(order: Sequence[int], rationale: Iterable[int]) -> float:
    """1.0 when a single-word rationale is the top-ranked word, else 0.0.

    Multi-word rationales always score 0; only examples whose rationale can
    occupy the top position alone can earn the point.
    """
    rationale = frozenset(rationale)
    _check_rationale(order, rationale)
    if len(rationale) != 1:
        return 0.0
    return 1.0 if order[0] in rationale else 0.0


@dataclass(frozen=True)
class ExampleMetrics:
    """One example's metric values under one (model, method, aggregation)."""

    sid: str
    model_id: str
    method: str
    aggregation: str
    layer: int | None
    edit_type: str
    rationale_size: int
    rr: float
    auprc: float
    top1: float
    top1_in_rationale: bool
    predicted_label: bool
    prob_needs_edit: float

    def to_json_dict(self) -> dict:
        return {
            "sid": self.sid,
            "model_id": self.model_id,
            "method": self.method,
            "aggregation": self.aggregation,
            "layer": self.layer,
            "edit_type": self.edit_type,
            "rationale_size": self.rationale_size,
            "rr": self.rr,
            "auprc": self.auprc,
            "top1": self.top1,
            "top1_in_rationale": self.top1_in_rationale,
            "predicted_label": self.predicted_label,
            "prob_needs_edit": self.prob_needs_edit,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ExampleMetrics":
        return cls(
            sid=obj["sid"],
            model_id=obj["model_id"],
            method=obj["method"],
            aggregation=obj["aggregation"],
            layer=obj["layer"],
            edit_type=obj["edit_type"],
            rationale_size=obj["rationale_size"],
            rr=obj["rr"],
            auprc=obj["auprc"],
            top1=obj["top1"],
            top1_in_rationale=obj["top1_in_rationale"],
            predicted_label=obj["predicted_label"],
            prob_needs_edit=obj["prob_needs_edit"],
        )


def evaluate_example(
    record: ScoreRecord, ranking: WordRanking, rationale: HumanRationale
) -> ExampleMetrics:
    """Score one ranking against one rationale.

    Raises :class:`AlignmentError` when sids disagree and
    :class:`RationaleNotInRankingError` when a rationale word index is not
    present in the ranking.
    """
    if not (record.sid == ranking.sid == rationale.sid):
        raise AlignmentError(
            f"mismatched sids: record {record.sid!r}, ranking {ranking.sid!r}, "
            f"rationale {rationale.sid!r}"
        )
    order = ranking.order
    indices = rationale.word_indices
    return ExampleMetrics(
        sid=record.sid,
        model_id=record.model_id,
        method=record.method,
        aggregation=ranking.aggregation,
        layer=record.layer,
        edit_type=rationale.edit_type.value,
        rationale_size=len(indices),
        rr=reciprocal_rank(order, indices),
        auprc=auprc(order, indices),
        top1=top1_match(order, indices),
        top1_in_rationale=bool(order) and order[0] in indices,
        predicted_label=record.predicted_label,
        prob_needs_edit=record.prob_needs_edit,
    )


LABEL_SLICES = ("all", "correct", "wrong")


def in_label_slice(example: ExampleMetrics, label_slice: str) -> bool:
    """Membership test for the prediction-outcome slices.

    Every rationale-bearing example truly needs an edit, so "correct" means
    the model predicted needs-edit and "wrong" means it did not.
    """
    if label_slice == "all":
        return True
    if label_slice == "correct":
        return example.predicted_label
    if label_slice == "wrong":
        return not example.predicted_label
    raise ValueError(f"unknown label slice {label_slice!r}")


@dataclass(frozen=True)
class AggregateMetrics:
    """Mean metric values over a group of examples."""

    model_id: str
    method: str
    aggregation: str
    layer: int | None
    edit_type: str
    label_slice: str
    n_examples: int
    mean_rr: float
    mean_auprc: float
    mean_top1: float

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "method": self.method,
            "aggregation": self.aggregation,
            "layer": self.layer,
            "edit_type": self.edit_type,
            "label_slice": self.label_slice,
            "n_examples": self.n_examples,
            "mean_rr": self.mean_rr,
            "mean_auprc": self.mean_auprc,
            "mean_top1": self.mean_top1,
        }


def aggregate(
    examples: Sequence[ExampleMetrics],
    *,
    edit_type: str = "all",
    label_slice: str = "all",
) -> AggregateMetrics:
    """Mean rr/auprc/top1 over ``examples``, which must be non-empty and
    share one (model, method, aggregation, layer) group.

    ``edit_type`` and ``label_slice`` only label the result; the caller
    filters the examples.
    """
    if not examples:
        raise EmptyInputError("cannot aggregate zero examples")
    head = examples[0]
    group = (head.model_id, head.method, head.aggregation, head.layer)
    for ex in examples:
        if (ex.model_id, ex.method, ex.aggregation, ex.layer) != group:
            raise AlignmentError(
                "examples span multiple groups: "
                f"{group} vs {(ex.model_id, ex.method, ex.aggregation, ex.layer)}"
            )
    n = len(examples)
    return AggregateMetrics(
        model_id=head.model_id,
        method=head.method,
        aggregation=head.aggregation,
        layer=head.layer,
        edit_type=edit_type,
        label_slice=label_slice,
        n_examples=n,
        mean_rr=sum(ex.rr for ex in examples) / n,
        mean_auprc=sum(ex.auprc for ex in examples) / n,
        mean_top1=sum(ex.top1 for ex in examples) / n,
    )


def aggregate_table(
    examples: Sequence[ExampleMetrics],
) -> list[AggregateMetrics]:
    """One aggregate row per (edit type, label slice) combination present.

    Edit types run "all" first then sorted; within each, slices follow
    ``LABEL_SLICES`` order.  Combinations with no examples are left out.
    """
    edit_types = ["all"] + sorted({ex.edit_type for ex in examples})
    rows = []
    for edit_type in edit_types:
        of_type = [
            ex for ex in examples if edit_type == "all" or ex.edit_type == edit_type
        ]
        for label_slice in LABEL_SLICES:
            subset = [ex for ex in of_type if in_label_slice(ex, label_slice)]
            if subset:
                rows.append(
                    aggregate(subset, edit_type=edit_type, label_slice=label_slice)
                )
    return rows
