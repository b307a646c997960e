#!/usr/bin/env python3
"""From raw token scores to word rankings to plausibility metrics, by hand.

Everything here is small enough to check on paper, which is the point:
the metric definitions are easy to misremember (the reciprocal rank used
throughout removes earlier hits before reading off later ranks).
"""

from editeval.corpus import pre_edit_from_text
from editeval.metrics import auprc, evaluate_example, reciprocal_rank, top1_match
from editeval.rationales import EditType, HumanRationale
from editeval.scores import (
    ScoreRecord,
    TokenScore,
    WordRanking,
    aggregate_attention,
    aggregate_gradient,
)

text = "We apreciate the data ."
sentence = pre_edit_from_text(text)
print("words:", [w.surface for w in sentence.words])

# A fake attention dump: one [CLS]-style delimiter (null offsets) plus one
# token per word, except "apreciate" which the tokenizer split in two.
tokens = [
    TokenScore("[CLS]", None, None, 0.05),
    TokenScore("we", 0, 2, 0.10),
    TokenScore("apre", 3, 7, 0.30),
    TokenScore("##ciate", 7, 12, 0.25),
    TokenScore("the", 13, 16, 0.05),
    TokenScore("data", 17, 21, 0.20),
    TokenScore(".", 22, 23, 0.05),
]
record = ScoreRecord(
    sid="demo.1", model_id="demo-model", method="attention",
    layer=1, prob_needs_edit=0.9, tokens=tuple(tokens),
)

ranking = aggregate_attention(record, sentence)
print("word sums:", ranking.scores)
print("ranking  :", ranking.order)  # ties break toward the earlier word

# Gradient records aggregate differently: signed sums by default, or
# magnitudes. Same token layout, scores can be negative.
grad = ScoreRecord(
    sid="demo.1", model_id="demo-model", method="grad_x_input",
    layer=None, prob_needs_edit=0.9,
    tokens=tuple(
        TokenScore(t.surface, t.start, t.end, s)
        for t, s in zip(tokens, [0.0, -0.4, 0.35, -0.1, 0.05, 0.2, 0.0])
    ),
)
print("signed   :", aggregate_gradient(grad, sentence, magnitude=False).order)
print("magnitude:", aggregate_gradient(grad, sentence, magnitude=True).order)

# The human said: "apreciate" (word 1) is the misspelled word.
rationale = HumanRationale(
    sid="demo.1", edit_type=EditType.SPELLING,
    word_indices=frozenset({1}), char_spans=((3, 12),),
)

m = evaluate_example(record, ranking, rationale)
print(f"rr={m.rr}  auprc={m.auprc}  top1={m.top1}")

# Removal in action: rationale {0, 2} against ranking (0, 3, 2, 1).
# Plain reciprocal ranks would give (1/1 + 1/3) / 2. With removal the
# second hit moves up to rank 2 once the first is taken out.
order = [0, 3, 2, 1]
hits = {0, 2}
print("modified rr:", reciprocal_rank(order, hits))   # 2 / (1 + 2)
print("auprc      :", auprc(order, hits))
print("top1       :", top1_match(order, hits))        # 0.0: needs |H| == 1
