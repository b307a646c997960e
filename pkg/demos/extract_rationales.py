#!/usr/bin/env python3
"""Run rationale extraction over the bundled mini corpus and inspect the results.

Two edit shapes yield a usable human rationale:
  spelling: every del/ins pair swaps one misspelled word for a dictionary word
  deleted:  the edit only removes text
Everything else is skipped with a reason, and the stats keep the tally.
"""

from importlib import resources
from pathlib import Path

from editeval.corpus import pre_edit_from_text
from editeval.rationales import Dictionary, extract_rationale_dataset

data = Path(str(resources.files("editeval").joinpath("data")))

dictionary = Dictionary.from_file(data / "reference_dictionary.txt")
records, stats = extract_rationale_dataset(data / "mini_corpus.txt", dictionary)

print(f"records: {stats.n_records}  emitted: {stats.n_emitted}")
print(f"spelling: {stats.n_spelling}  deleted: {stats.n_deleted}")
print("skipped:", dict(sorted(stats.skipped.items())))
print("near misses (would classify with a bigger dictionary):", stats.spelling_near_misses)

print("\nfirst few rationales:")
for rec in records[:5]:
    words = pre_edit_from_text(rec.pre_edit_text).words
    marked = [words[i].surface for i in sorted(rec.rationale.word_indices)]
    print(f"  {rec.rationale.sid:<8} {rec.rationale.edit_type.value:<8} words={marked}")
    print(f"           {rec.pre_edit_text}")

# The rationale spans always point back into the pre-edit text.
rec = records[0]
raw = rec.pre_edit_text.encode("utf-8")
for start, end in rec.rationale.char_spans:
    print(f"bytes [{start}, {end}) -> {raw[start:end].decode('utf-8')!r}")
