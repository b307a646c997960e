"""Small-scale fine-tuning of the needs-edit classifier."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .errors import DumpError
from .modeling import PLACEHOLDER_TOKENS

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FinetuneConfig:
    """Hyperparameters for a short fine-tuning run."""

    learning_rate: float = 1e-6
    batch_size: int = 32
    epochs: int = 1
    max_steps: int | None = None  # 0 saves the base weights untouched
    max_examples: int | None = None
    dev_fraction: float = 0.1
    seed: int = 0
    device: str = "cpu"


@dataclass(frozen=True)
class LabeledSentence:
    sid: str
    text: str  # the pre-edit form, what the model sees
    label: int  # 1 when the editors changed anything


def read_labeled_corpus(path: str | Path) -> list[LabeledSentence]:
    """Build (pre-edit text, needs-edit label) pairs from a parsed corpus.

    The input is canonical corpus JSONL: one object per line with ``sid``
    and ``segments`` of {kind, text}, kinds kept/del/ins.  Pre-edit text
    is the kept and deleted segments concatenated in order; the label is
    whether any segment is an edit.  Sentences whose pre-edit side is
    blank (pure insertions) are dropped with a log line.
    """
    rows: list[LabeledSentence] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DumpError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            try:
                sid = obj["sid"]
                segments = obj["segments"]
                text = "".join(
                    s["text"] for s in segments if s["kind"] in ("kept", "del")
                )
                label = int(any(s["kind"] != "kept" for s in segments))
            except (KeyError, TypeError) as exc:
                raise DumpError(
                    f"{path}: line {lineno}: not a corpus row ({exc!r})"
                ) from exc
            if not text.strip():
                log.info("dropping %s: empty pre-edit text", sid)
                continue
            rows.append(LabeledSentence(sid, text, label))
    if not rows:
        raise DumpError(f"{path}: no usable sentences")
    return rows


@dataclass
class FinetuneReport:
    n_train: int
    n_dev: int
    n_steps: int
    n_added_tokens: int
    mean_train_loss: float | None
    dev_metrics: dict

    def to_json_dict(self) -> dict:
        return {
            "n_train": self.n_train,
            "n_dev": self.n_dev,
            "n_steps": self.n_steps,
            "n_added_tokens": self.n_added_tokens,
            "mean_train_loss": self.mean_train_loss,
            "dev_metrics": dict(self.dev_metrics),
        }


def _binary_metrics(labels, predictions) -> dict:
    tp = sum(1 for y, p in zip(labels, predictions) if y and p)
    fp = sum(1 for y, p in zip(labels, predictions) if not y and p)
    fn = sum(1 for y, p in zip(labels, predictions) if y and not p)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (
        sum(1 for y, p in zip(labels, predictions) if y == p) / len(labels)
        if labels
        else 0.0
    )
    return {
        "n": len(labels),
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def finetune_small(
    base: str | Path,
    corpus_path: str | Path,
    out_dir: str | Path,
    config: FinetuneConfig = FinetuneConfig(),
) -> FinetuneReport:
    """Fine-tune a base checkpoint into a needs-edit classifier and save it.

    Grows the vocabulary by the placeholder tokens, trains a single-logit
    head with AdamW and sigmoid cross-entropy on the needs-edit label,
    evaluates on a held-out dev slice, and writes model + tokenizer +
    metrics.json into ``out_dir``.
    """
    torch.manual_seed(config.seed)
    tokenizer = AutoTokenizer.from_pretrained(base)
    model = AutoModelForSequenceClassification.from_pretrained(base, num_labels=1)
    n_added = tokenizer.add_tokens(list(PLACEHOLDER_TOKENS), special_tokens=True)
    if n_added:
        model.resize_token_embeddings(len(tokenizer))
    device = torch.device(config.device)
    model.to(device)

    data = read_labeled_corpus(corpus_path)
    rng = random.Random(config.seed)
    rng.shuffle(data)
    if config.max_examples is not None:
        data = data[: config.max_examples]
    n_dev = 0
    if len(data) > 1 and config.dev_fraction > 0:
        n_dev = min(len(data) - 1, max(1, round(len(data) * config.dev_fraction)))
    dev, train = data[:n_dev], data[n_dev:]

    max_length = int(model.config.max_position_embeddings)

    def encode(batch):
        features = tokenizer(
            [s.text for s in batch],
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        labels = torch.tensor([float(s.label) for s in batch])
        return {k: v.to(device) for k, v in features.items()}, labels.to(device)

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    n_steps = 0
    losses: list[float] = []
    model.train()
    for _ in range(config.epochs):
        if config.max_steps is not None and n_steps >= config.max_steps:
            break
        order = list(range(len(train)))
        rng.shuffle(order)
        for start in range(0, len(train), config.batch_size):
            if config.max_steps is not None and n_steps >= config.max_steps:
                break
            batch = [train[i] for i in order[start : start + config.batch_size]]
            features, labels = encode(batch)
            logits = model(**features).logits.squeeze(-1)
            loss = torch.nn.functional.binary_cross_entropy_with_logits(logits, labels)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
            n_steps += 1
    model.eval()

    dev_labels: list[bool] = []
    dev_predictions: list[bool] = []
    with torch.no_grad():
        for start in range(0, len(dev), config.batch_size):
            batch = dev[start : start + config.batch_size]
            features, labels = encode(batch)
            probs = torch.sigmoid(model(**features).logits.squeeze(-1))
            dev_predictions.extend(bool(p) for p in probs >= 0.5)
            dev_labels.extend(bool(y) for y in labels)

    report = FinetuneReport(
        n_train=len(train),
        n_dev=len(dev),
        n_steps=n_steps,
        n_added_tokens=n_added,
        mean_train_loss=sum(losses) / len(losses) if losses else None,
        dev_metrics=_binary_metrics(dev_labels, dev_predictions),
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    (out / "metrics.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    log.info(
        "saved checkpoint to %s after %d steps (dev f1 %.3f)",
        out,
        n_steps,
        report.dev_metrics["f1"],
    )
    return report
