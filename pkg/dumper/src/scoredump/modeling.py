"""Checkpoint loading and tokenization with byte-level offsets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .errors import DumpError

# Corpus placeholders for math, display math, citations and references.
# Registered as atomic vocabulary entries so they never get wordpiece-split.
PLACEHOLDER_TOKENS = ("_MATH_", "_MATHDISP_", "_CITE_", "_REF_")


@dataclass
class Classifier:
    """A loaded single-logit edit classifier plus its tokenizer."""

    model: torch.nn.Module
    tokenizer: object
    device: torch.device

    @property
    def n_layers(self) -> int:
        return int(self.model.config.num_hidden_layers)

    @property
    def max_length(self) -> int:
        limit = int(self.model.config.max_position_embeddings)
        declared = getattr(self.tokenizer, "model_max_length", None)
        if declared:
            limit = min(limit, int(declared))
        return limit


def load_checkpoint(path: str | Path, *, device: str = "cpu") -> Classifier:
    """Load a checkpoint for dumping.

    The model must be a single-logit binary classifier: the edit
    probability is sigmoid(logit) and "needs edit" is predicted at
    prob >= 0.5.  Attention is forced to the eager implementation because
    the fused kernels do not expose attention weights.

    Raises DumpError for slow tokenizers (no offset mapping) and for
    checkpoints with the wrong head shape.
    """
    tokenizer = AutoTokenizer.from_pretrained(path)
    if not getattr(tokenizer, "is_fast", False):
        raise DumpError(f"{path}: need a fast tokenizer for offset mapping")
    model = AutoModelForSequenceClassification.from_pretrained(path)
    if model.config.num_labels != 1:
        raise DumpError(
            f"{path}: expected a single-logit classifier, "
            f"got num_labels={model.config.num_labels}"
        )
    model.set_attn_implementation("eager")
    dev = torch.device(device)
    model.to(dev)
    model.eval()
    return Classifier(model=model, tokenizer=tokenizer, device=dev)


@dataclass(frozen=True)
class EncodedExample:
    """One tokenized sentence, ready for batching.

    ``offsets`` holds byte spans into the pre-edit text, None for
    template tokens like [CLS]/[SEP] that exist only inside the model.
    """

    sid: str
    features: dict
    surfaces: tuple[str, ...]
    offsets: tuple[tuple[int, int] | None, ...]


def _byte_prefix_sums(text: str) -> list[int]:
    sums = [0]
    for ch in text:
        sums.append(sums[-1] + len(ch.encode("utf-8")))
    return sums


def encode_example(tokenizer, sid: str, text: str, *, max_length: int) -> EncodedExample:
    """Tokenize one sentence and convert character offsets to byte offsets.

    Fast tokenizers report character spans; downstream alignment indexes
    the UTF-8 encoding of the text, so spans are rewritten through a
    per-character byte prefix table.  Zero-width character spans mark
    template tokens and come out as None.
    """
    encoding = tokenizer(
        text,
        truncation=True,
        max_length=max_length,
        return_offsets_mapping=True,
    )
    char_offsets = encoding.pop("offset_mapping")
    surfaces = tuple(tokenizer.convert_ids_to_tokens(encoding["input_ids"]))
    sums = _byte_prefix_sums(text)
    offsets: list[tuple[int, int] | None] = []
    for start, end in char_offsets:
        offsets.append(None if start == end else (sums[start], sums[end]))
    return EncodedExample(sid, dict(encoding), surfaces, tuple(offsets))


def collate(tokenizer, examples, device: torch.device) -> dict:
    """Pad encoded examples into one tensor batch."""
    batch = tokenizer.pad([ex.features for ex in examples], return_tensors="pt")
    return {k: v.to(device) for k, v in batch.items()}
