#!/usr/bin/env python3
"""Walk through parsing a marked-up sentence and rebuilding both text versions."""

from editeval.corpus import (
    deleted_byte_spans,
    parse_sentence,
    pre_edit_from_text,
    reconstruct_post_edit,
    reconstruct_pre_edit,
)

# parse_sentence takes the markup between the <sentence> tags; the
# corpus readers strip the envelope and hand over the sid.
markup = "We <del>recieved</del><ins>received</ins> the data."

sent = parse_sentence(markup, sid="demo.1")
print("sid:", sent.sid)
for seg in sent.segments:
    print(f"  {seg.kind.value:<4} {seg.text!r}")

# Pre-edit text = kept + deleted runs, post-edit = kept + inserted runs.
# Concatenation is raw: the markup carries its own spacing.
pre = reconstruct_pre_edit(sent)
post = reconstruct_post_edit(sent)
print("pre: ", pre.text)
print("post:", post)

# Words carry byte offsets into the pre-edit text.
for w in pre.words:
    print(f"  word[{w.index}] {w.surface!r} bytes [{w.start}, {w.end})")

# Which byte ranges did the editor delete?
print("deleted spans:", deleted_byte_spans(sent))

# A tag-free sentence splits the same way via pre_edit_from_text.
plain = pre_edit_from_text("No edits here at all.")
print("plain words:", [w.surface for w in plain.words])

# Offsets are UTF-8 bytes, not characters. Accented words are wider in
# bytes than in characters and the spans reflect that.
wide = pre_edit_from_text("a naïve plan")
for w in wide.words:
    print(f"  {w.surface!r} -> [{w.start}, {w.end})")
