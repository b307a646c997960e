#!/usr/bin/env python3
"""Drive the whole CLI pipeline in a scratch directory.

parse -> extract -> (synthesize score dumps) -> evaluate -> analyze -> report

The score files here are random stand-ins for real model dumps; the shape
of the artifacts is the real one. Run with no arguments.
"""

import json
import random
import tempfile
from importlib import resources
from pathlib import Path

from editeval.cli import main
from editeval.corpus import pre_edit_from_text

work = Path(tempfile.mkdtemp(prefix="editeval-demo-"))
corpus = str(resources.files("editeval").joinpath("data", "mini_corpus.txt"))
print("working in", work)

rc = main(["parse", "--corpus", corpus, "--out-dir", str(work / "parse")])
assert rc == 0
rc = main(["extract", "--corpus", corpus, "--out-dir", str(work / "extract")])
assert rc == 0

rationales = [
    json.loads(line)
    for line in (work / "extract" / "rationales.jsonl").read_text().splitlines()
]
print(f"{len(rationales)} rationales extracted")


def synthesize(model_id: str, path: Path) -> None:
    # One token per word plus a [CLS]-style delimiter; scores are seeded
    # per model so reruns are stable.
    rng = random.Random(model_id)
    with path.open("w", encoding="utf-8") as fh:
        for rec in rationales:
            words = pre_edit_from_text(rec["pre_edit_text"]).words
            prob = rng.choice([0.95, 0.85, 0.4])
            for layer in (1, 2):
                tokens = [{"surface": "[CLS]", "start": None, "end": None,
                           "score": rng.random()}]
                tokens += [{"surface": w.surface, "start": w.start, "end": w.end,
                            "score": rng.random()} for w in words]
                fh.write(json.dumps({
                    "sid": rec["sid"], "model_id": model_id,
                    "method": "attention", "layer": layer,
                    "prob_needs_edit": prob, "tokens": tokens,
                }) + "\n")
            tokens = [{"surface": w.surface, "start": w.start, "end": w.end,
                       "score": rng.uniform(-1, 1)} for w in words]
            fh.write(json.dumps({
                "sid": rec["sid"], "model_id": model_id,
                "method": "grad_x_input", "layer": None,
                "prob_needs_edit": prob, "tokens": tokens,
            }) + "\n")


scores_a = work / "model_a.jsonl"
scores_b = work / "model_b.jsonl"
synthesize("model-a", scores_a)
synthesize("model-b", scores_b)

rc = main(["evaluate", "--scores", str(scores_a), str(scores_b),
           "--rationales", str(work / "extract" / "rationales.jsonl"),
           "--out-dir", str(work / "eval")])
assert rc == 0
rc = main(["analyze", "--metrics", str(work / "eval" / "metrics.jsonl"),
           "--out-dir", str(work / "analysis")])
assert rc == 0
rc = main(["report", "--analysis", str(work / "analysis"),
           "--extraction", str(work / "extract" / "extraction_stats.json"),
           "--out-dir", str(work / "report")])
assert rc == 0

for sub in ("parse", "extract", "eval", "analysis", "report"):
    names = sorted(p.name for p in (work / sub).iterdir())
    print(f"{sub}/: {', '.join(names)}")

print("\n--- summary.md (head) ---")
summary = (work / "report" / "summary.md").read_text().splitlines()
print("\n".join(summary[:25]))
