"""Batch scoring of rationale datasets into score files."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .attribution import GRAD_TARGETS, grad_x_input, head_summed_cls_attention
from .errors import DumpError
from .modeling import Classifier, collate, encode_example, load_checkpoint
from .records import ScoreWriter, read_rationale_dataset, score_record

log = logging.getLogger(__name__)

METHOD_ATTENTION = "attention"
METHOD_GRADIENT = "grad_x_input"
METHODS = (METHOD_ATTENTION, METHOD_GRADIENT)


@dataclass(frozen=True)
class DumpSpec:
    """Everything that determines one dump run."""

    model_id: str
    checkpoint: Path
    rationales: Path
    methods: tuple[str, ...] = METHODS
    layers: tuple[int, ...] | None = None  # None: every layer the model has
    batch_size: int = 8
    device: str = "cpu"
    grad_target: str = "prob"

    def __post_init__(self):
        if not self.model_id:
            raise DumpError("model_id must be non-empty")
        if not self.methods:
            raise DumpError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise DumpError(f"unknown methods: {unknown}")
        if len(set(self.methods)) != len(self.methods):
            raise DumpError("duplicate methods")
        if self.layers is not None and (
            not self.layers or list(self.layers) != sorted(set(self.layers))
            or self.layers[0] < 1
        ):
            raise DumpError(
                f"layers must be ascending, unique and >= 1, got {self.layers}"
            )
        if self.batch_size < 1:
            raise DumpError("batch_size must be >= 1")
        if self.grad_target not in GRAD_TARGETS:
            raise DumpError(f"unknown gradient target: {self.grad_target!r}")


@dataclass
class DumpReport:
    """Counts for one dump run; skips carry (sid, reason) pairs."""

    n_examples: int = 0
    n_records: int = 0
    records_by_method: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)

    def skip(self, sid: str, reason: str) -> None:
        log.warning("skipping %s: %s", sid, reason)
        self.skipped.append((sid, reason))

    def count(self, method: str, n: int = 1) -> None:
        self.n_records += n
        self.records_by_method[method] = self.records_by_method.get(method, 0) + n

    def to_json_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "n_records": self.n_records,
            "n_skipped": self.n_skipped,
            "records_by_method": dict(sorted(self.records_by_method.items())),
            "skipped": [list(pair) for pair in self.skipped],
        }


def resolve_layers(requested: tuple[int, ...] | None, n_layers: int) -> tuple[int, ...]:
    """Default to every layer; reject layers the model does not have."""
    if requested is None:
        return tuple(range(1, n_layers + 1))
    bad = [layer for layer in requested if not 1 <= layer <= n_layers]
    if bad:
        raise DumpError(f"model has layers 1..{n_layers}, requested {bad}")
    return tuple(requested)


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i : i + size]


def _token_rows(encoded, scores) -> list:
    return [
        (surface, span[0] if span else None, span[1] if span else None, value)
        for (surface, span), value in zip(
            zip(encoded.surfaces, encoded.offsets), scores
        )
    ]


def dump_scores(spec: DumpSpec, out_path: str | Path, *, classifier: Classifier | None = None) -> DumpReport:
    """Run the checkpoint over a rationale dataset and write one score file.

    Every example yields one record per requested attention layer plus one
    gradient record, in that order.  Examples that fail to tokenize or
    that produce non-finite numbers are skipped and logged, never written,
    so every emitted record parses cleanly downstream.
    """
    if classifier is None:
        classifier = load_checkpoint(spec.checkpoint, device=spec.device)
    examples = read_rationale_dataset(spec.rationales)

    need_attention = METHOD_ATTENTION in spec.methods
    layers = resolve_layers(spec.layers, classifier.n_layers) if need_attention else ()

    report = DumpReport(n_examples=len(examples))
    with ScoreWriter(out_path) as writer:
        for batch in _batches(examples, spec.batch_size):
            encoded = []
            for example in batch:
                try:
                    encoded.append(
                        encode_example(
                            classifier.tokenizer,
                            example.sid,
                            example.pre_edit_text,
                            max_length=classifier.max_length,
                        )
                    )
                except Exception as exc:  # tokenizer trouble is data, not a bug
                    report.skip(example.sid, f"tokenization failed: {exc}")
            if encoded:
                _dump_batch(spec, classifier, encoded, layers, writer, report)
    return report


def _dump_batch(spec, classifier, encoded, layers, writer, report) -> None:
    features = collate(classifier.tokenizer, encoded, classifier.device)
    input_ids = features.pop("input_ids")
    need_attention = METHOD_ATTENTION in spec.methods
    need_gradient = METHOD_GRADIENT in spec.methods
    attentions: list = []

    def forward(inputs_embeds):
        out = classifier.model(
            inputs_embeds=inputs_embeds,
            output_attentions=need_attention,
            **features,
        )
        if need_attention:
            attentions.extend(a.detach() for a in out.attentions)
        return out.logits

    if need_gradient:
        embeds = classifier.model.get_input_embeddings()(input_ids)
        grad_scores, probs = grad_x_input(forward, embeds, target=spec.grad_target)
    else:
        with torch.no_grad():
            embeds = classifier.model.get_input_embeddings()(input_ids)
            probs = torch.sigmoid(forward(embeds).squeeze(-1))
        grad_scores = None

    layer_scores = {
        layer: head_summed_cls_attention(attentions, layer) for layer in layers
    }

    for b, example in enumerate(encoded):
        n_tokens = len(example.surfaces)  # padding only ever extends this
        prob = float(probs[b])
        if not math.isfinite(prob):
            report.skip(example.sid, "non-finite probability")
            continue

        rows = []
        for layer in layers:
            rows.append((METHOD_ATTENTION, layer, layer_scores[layer][b, :n_tokens]))
        if need_gradient:
            rows.append((METHOD_GRADIENT, None, grad_scores[b, :n_tokens]))
        if any(not torch.isfinite(scores).all() for _, _, scores in rows):
            report.skip(example.sid, "non-finite scores")
            continue

        for method, layer, scores in rows:
            writer.write(
                score_record(
                    example.sid,
                    spec.model_id,
                    method,
                    layer,
                    prob,
                    _token_rows(example, scores.tolist()),
                )
            )
            report.count(method)
