"""Cross-model comparison, confidence partitioning, and layer sweeps.

Everything here consumes per-example metric rows (see
:class:`editeval.metrics.ExampleMetrics`), so analyses can run from files
without touching score dumps or the corpus again.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    AlignmentError,
    EmptyInputError,
    MismatchedExampleSetsError,
    MissingLayerError,
)
from .metrics import (
    AggregateMetrics,
    ExampleMetrics,
    aggregate,
    aggregate_table,
)
from .scores import METHOD_ATTENTION

logger = logging.getLogger(__name__)

ATTENDED_STRICT = "strict"
ATTENDED_TOP1 = "top1"
ATTENDED_MODES = (ATTENDED_STRICT, ATTENDED_TOP1)


def is_attended(example: ExampleMetrics, mode: str) -> bool:
    """Did the ranking put the rationale on top, under the given mode?

    Strict mode asks for the full rationale to occupy the top positions,
    which holds exactly when rr == 1.0 (every removed-list rank must be the
    integer 1, so the float comparison is exact).  Top-1 mode only asks for
    the single best-ranked word to be a rationale word.
    """
    if mode == ATTENDED_STRICT:
        return example.rr == 1.0
    if mode == ATTENDED_TOP1:
        return example.top1_in_rationale
    raise ValueError(f"unknown attended mode {mode!r}")


# -- model comparison --------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    """One group's aggregate plus its deltas against the baseline group."""

    group: str
    baseline: str
    edit_type: str
    label_slice: str
    n_examples: int
    mean_rr: float
    mean_auprc: float
    mean_top1: float
    delta_rr: float | None
    delta_auprc: float | None
    delta_top1: float | None

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "baseline": self.baseline,
            "edit_type": self.edit_type,
            "label_slice": self.label_slice,
            "n_examples": self.n_examples,
            "mean_rr": self.mean_rr,
            "mean_auprc": self.mean_auprc,
            "mean_top1": self.mean_top1,
            "delta_rr": self.delta_rr,
            "delta_auprc": self.delta_auprc,
            "delta_top1": self.delta_top1,
        }


def restrict_to_common_sids(
    groups: Sequence[tuple[str, Sequence[ExampleMetrics]]],
) -> list[tuple[str, list[ExampleMetrics]]]:
    """Keep only examples whose sid appears in every group.

    Raises :class:`MismatchedExampleSetsError` when the intersection is
    empty, and :class:`AlignmentError` when a group repeats a sid.
    """
    if not groups:
        raise EmptyInputError("no groups to compare")
    sid_sets = []
    for name, examples in groups:
        sids = [ex.sid for ex in examples]
        if len(set(sids)) != len(sids):
            raise AlignmentError(f"group {name!r} contains duplicate sids")
        sid_sets.append(set(sids))
    common = set.intersection(*sid_sets)
    if not common:
        raise MismatchedExampleSetsError("groups share no sids")
    dropped = {name: len(s - common) for (name, _), s in zip(groups, sid_sets)}
    for name, n in dropped.items():
        if n:
            logger.info("comparison drops %d sids from group %s", n, name)
    return [
        (name, [ex for ex in examples if ex.sid in common])
        for name, examples in groups
    ]


def compare(
    groups: Sequence[tuple[str, Sequence[ExampleMetrics]]],
    *,
    restrict: bool = True,
) -> list[ComparisonRow]:
    """Aggregate each named group and report deltas against the first.

    With ``restrict`` (the default) every group is first cut down to the
    sids all groups share, so the "all" slice is a paired comparison over
    one example set.  The correct/wrong slices still differ per group,
    since each model draws its own prediction boundary.
    """
    if restrict:
        groups = restrict_to_common_sids(groups)
    elif not groups:
        raise EmptyInputError("no groups to compare")
    names = [name for name, _ in groups]
    if len(set(names)) != len(names):
        raise AlignmentError(f"duplicate group names: {names}")

    n_all = {name: len(examples) for name, examples in groups}
    if len(set(n_all.values())) != 1:
        raise MismatchedExampleSetsError(
            f"groups have unequal example counts after restriction: {n_all}"
        )

    baseline_name = groups[0][0]
    tables = [(name, aggregate_table(examples)) for name, examples in groups]
    base_rows = {
        (row.edit_type, row.label_slice): row for row in tables[0][1]
    }
    out = []
    for name, table in tables:
        for row in table:
            base = base_rows.get((row.edit_type, row.label_slice))
            out.append(
                ComparisonRow(
                    group=name,
                    baseline=baseline_name,
                    edit_type=row.edit_type,
                    label_slice=row.label_slice,
                    n_examples=row.n_examples,
                    mean_rr=row.mean_rr,
                    mean_auprc=row.mean_auprc,
                    mean_top1=row.mean_top1,
                    delta_rr=row.mean_rr - base.mean_rr if base else None,
                    delta_auprc=row.mean_auprc - base.mean_auprc if base else None,
                    delta_top1=row.mean_top1 - base.mean_top1 if base else None,
                )
            )
    return out


# -- confidence partitioning -------------------------------------------------

@dataclass(frozen=True)
class ConfidenceReport:
    """Needs-edit confidence, split by whether the rationale was attended.

    Covers only examples the model predicted as needing an edit (all of
    them truly do).  ``relative_gain`` is (attended - other) / other, None
    whenever either side is empty or the other-side mean is zero.
    """

    mode: str
    edit_type: str
    n_examples: int
    n_attended: int
    n_other: int
    mean_prob_attended: float | None
    mean_prob_other: float | None
    relative_gain: float | None

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "edit_type": self.edit_type,
            "n_examples": self.n_examples,
            "n_attended": self.n_attended,
            "n_other": self.n_other,
            "mean_prob_attended": self.mean_prob_attended,
            "mean_prob_other": self.mean_prob_other,
            "relative_gain": self.relative_gain,
        }


def _confidence_row(
    examples: Sequence[ExampleMetrics], mode: str, edit_type: str
) -> ConfidenceReport:
    attended = [ex for ex in examples if is_attended(ex, mode)]
    other = [ex for ex in examples if not is_attended(ex, mode)]
    mean_a = (
        sum(ex.prob_needs_edit for ex in attended) / len(attended)
        if attended else None
    )
    mean_o = (
        sum(ex.prob_needs_edit for ex in other) / len(other) if other else None
    )
    gain = None
    if mean_a is not None and mean_o is not None and mean_o != 0:
        gain = (mean_a - mean_o) / mean_o
    return ConfidenceReport(
        mode=mode,
        edit_type=edit_type,
        n_examples=len(examples),
        n_attended=len(attended),
        n_other=len(other),
        mean_prob_attended=mean_a,
        mean_prob_other=mean_o,
        relative_gain=gain,
    )


def confidence_correlation(
    examples: Sequence[ExampleMetrics],
) -> list[ConfidenceReport]:
    """Confidence split for each attended mode and edit type.

    Rows run mode-major ("strict" before "top1"), edit type "all" first
    then sorted.  Raises :class:`EmptyInputError` when no example carries a
    positive prediction.
    """
    positives = [ex for ex in examples if ex.predicted_label]
    if not positives:
        raise EmptyInputError("no positively-predicted examples to partition")
    edit_types = ["all"] + sorted({ex.edit_type for ex in positives})
    rows = []
    for mode in ATTENDED_MODES:
        for edit_type in edit_types:
            subset = [
                ex for ex in positives
                if edit_type == "all" or ex.edit_type == edit_type
            ]
            rows.append(_confidence_row(subset, mode, edit_type))
    return rows


# -- layer sweeps ------------------------------------------------------------

@dataclass(frozen=True)
class LayerSweep:
    """Aggregate metrics per attention layer, layers 1..n_layers."""

    model_id: str
    aggregation: str
    n_layers: int
    per_layer: tuple[AggregateMetrics, ...]

    def best_layer(self, metric: str = "mean_rr") -> int:
        values = [getattr(row, metric) for row in self.per_layer]
        return max(range(len(values)), key=lambda i: (values[i], -i)) + 1


def layer_sweep(examples: Sequence[ExampleMetrics]) -> LayerSweep:
    """Sweep aggregates over the attention layers present in ``examples``.

    The examples must all be attention rows for one (model, aggregation),
    cover layers 1..L with no gaps (:class:`MissingLayerError` otherwise),
    and every layer must cover the same sids
    (:class:`MismatchedExampleSetsError` otherwise).
    """
    if not examples:
        raise EmptyInputError("no examples to sweep")
    for ex in examples:
        if ex.method != METHOD_ATTENTION:
            raise AlignmentError(
                f"layer sweeps need attention rows, got method {ex.method!r} "
                f"for sid {ex.sid!r}"
            )
    by_layer: dict[int, list[ExampleMetrics]] = {}
    for ex in examples:
        by_layer.setdefault(ex.layer, []).append(ex)
    layers = sorted(by_layer)
    if layers != list(range(1, len(layers) + 1)):
        raise MissingLayerError(
            f"layers present are {layers}, expected 1..{len(layers)} contiguous"
        )
    sid_sets = {layer: {ex.sid for ex in rows} for layer, rows in by_layer.items()}
    if len({frozenset(s) for s in sid_sets.values()}) != 1:
        counts = {layer: len(s) for layer, s in sid_sets.items()}
        raise MismatchedExampleSetsError(
            f"layers cover different sids (counts per layer: {counts})"
        )
    per_layer = tuple(aggregate(by_layer[layer]) for layer in layers)
    head = per_layer[0]
    return LayerSweep(
        model_id=head.model_id,
        aggregation=head.aggregation,
        n_layers=len(layers),
        per_layer=per_layer,
    )


def layer_sweep_rows(sweep: LayerSweep) -> list[dict]:
    """Long-format rows (one per layer and metric) for CSV export."""
    rows = []
    for agg_row in sweep.per_layer:
        for metric in ("mean_rr", "mean_auprc", "mean_top1"):
            rows.append(
                {
                    "model_id": sweep.model_id,
                    "aggregation": sweep.aggregation,
                    "layer": agg_row.layer,
                    "metric": metric,
                    "value": getattr(agg_row, metric),
                }
            )
    return rows
