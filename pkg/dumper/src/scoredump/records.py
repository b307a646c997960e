"""The two JSONL layouts shared with the evaluation toolkit.

The dumper reads rationale datasets and writes score files; the toolkit
does the reverse.  The packages agree on these file formats, not on code,
so the field names here are load-bearing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DumpError


@dataclass(frozen=True)
class RationaleExample:
    """The slice of a rationale-dataset row the dumper needs."""

    sid: str
    pre_edit_text: str


def read_rationale_dataset(path: str | Path) -> list[RationaleExample]:
    """Load (sid, pre-edit text) pairs from a rationale JSONL file.

    Rows carry more fields than the dumper uses; extras are ignored.
    Raises DumpError (with a line number) on malformed rows, duplicate
    sids, or an empty dataset.
    """
    examples: list[RationaleExample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DumpError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise DumpError(f"{path}: line {lineno}: expected an object")
            for key in ("sid", "pre_edit_text"):
                if not isinstance(obj.get(key), str) or not obj[key]:
                    raise DumpError(f"{path}: line {lineno}: missing or empty {key!r}")
            if obj["sid"] in seen:
                raise DumpError(f"{path}: line {lineno}: duplicate sid {obj['sid']!r}")
            seen.add(obj["sid"])
            examples.append(RationaleExample(obj["sid"], obj["pre_edit_text"]))
    if not examples:
        raise DumpError(f"{path}: no rationale rows")
    return examples


def score_record(
    sid: str,
    model_id: str,
    method: str,
    layer: int | None,
    prob_needs_edit: float,
    tokens,
) -> dict:
    """Build one score-file row.

    ``tokens`` is an iterable of (surface, start, end, score); start/end
    are byte offsets into the pre-edit text, or both None for tokens the
    model added (e.g. [CLS]).
    """
    return {
        "sid": sid,
        "model_id": model_id,
        "method": method,
        "layer": layer,
        "prob_needs_edit": prob_needs_edit,
        "tokens": [
            {"surface": surface, "start": start, "end": end, "score": score}
            for surface, start, end, score in tokens
        ],
    }


class ScoreWriter:
    """Append-only score-file writer; one handle for the whole dump."""

    def __init__(self, path: str | Path):
        self._fh = open(path, "w", encoding="utf-8")
        self.n_written = 0

    def write(self, record: dict) -> None:
        self._fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        self.n_written += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "ScoreWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
