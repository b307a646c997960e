"""Attribution math shared by both dump paths.

Deliberately free of tokenizer and file concerns so the numerics can be
checked against hand calculations and finite differences.
"""

from __future__ import annotations

import torch

GRAD_TARGETS = ("prob", "loss")


def head_summed_cls_attention(attentions, layer: int) -> torch.Tensor:
    """Sum one layer's attention over heads and read off the [CLS] query row.

    ``attentions`` is a sequence of (batch, heads, seq, seq) tensors, one
    per layer, as a transformer forward pass returns them; ``layer`` is
    1-based.  Returns (batch, seq) non-negative token scores: how much
    every head of that layer attends from [CLS] to each token, summed.
    """
    weights = attentions[layer - 1]
    return weights.sum(dim=1)[:, 0, :]


def grad_x_input(forward_fn, embeds: torch.Tensor, *, target: str = "prob"):
    """Gradient-times-input token scores for a batch of embedded inputs.

    ``forward_fn`` maps embeddings (batch, seq, dim) to single logits of
    shape (batch,) or (batch, 1).  Each token's score is the dot product
    of its embedding with the gradient of the predicted class's sigmoid
    probability; ``target="loss"`` differentiates the cross-entropy
    against the predicted label instead.

    Returns (scores, probs): (batch, seq) signed token scores and
    (batch,) edit probabilities, both detached.
    """
    if target not in GRAD_TARGETS:
        raise ValueError(f"unknown gradient target: {target!r}")
    embeds = embeds.detach().requires_grad_(True)
    logits = forward_fn(embeds)
    if logits.dim() == 2:
        logits = logits.squeeze(-1)
    probs = torch.sigmoid(logits)
    predicted = probs >= 0.5
    if target == "prob":
        objective = torch.where(predicted, probs, 1.0 - probs)
    else:
        objective = torch.nn.functional.binary_cross_entropy_with_logits(
            logits, predicted.to(logits.dtype), reduction="none"
        )
    # Examples are independent, so one backward pass over the batch sum
    # yields every per-example gradient.
    objective.sum().backward()
    scores = (embeds.grad * embeds).sum(dim=-1)
    return scores.detach(), probs.detach()
