import json
from pathlib import Path

import pytest
import torch
from transformers import BertConfig, BertForSequenceClassification

# Small closed vocabulary for the toy checkpoints.  Anything else becomes
# [UNK], which still carries the offsets of the word it replaced.
VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "we", "the", "a", "to", "of", "and", "in", "is", "it", "this", "that",
    "data", "model", "results", "sentence", "edit", "edits", "needs",
    "clean", "still", "image", "method", "was", "not", "very",
    "naive", "re", ".", ",", "_", "math", "cite", "ref",
    "##ce", "##ived", "##ly", "##s", "##d",
]

_acceptance_results: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(label, description): a top-level acceptance criterion; "
        "results are echoed as one PASS/FAIL line per criterion",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    # Only record criteria from this suite; the evaluation toolkit's tests
    # use the same marker for theirs.
    if marker is None or item.path.parent != Path(__file__).parent:
        return
    label, description = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance_results[label] = (report.outcome, description)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("dumper acceptance criteria")
    for label in sorted(_acceptance_results):
        outcome, description = _acceptance_results[label]
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        terminalreporter.write_line(f"[{word}] {label}: {description}")


def write_toy_checkpoint(
    directory: Path,
    *,
    n_layers: int = 3,
    n_heads: int = 4,
    hidden: int = 32,
    seed: int = 0,
) -> Path:
    """Save a randomly initialized single-logit BERT plus its tokenizer."""
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    (directory / "tokenizer_config.json").write_text(
        json.dumps({"tokenizer_class": "BertTokenizerFast", "do_lower_case": True}),
        encoding="utf-8",
    )
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=hidden,
        num_hidden_layers=n_layers,
        num_attention_heads=n_heads,
        intermediate_size=hidden * 2,
        max_position_embeddings=96,
        num_labels=1,
    )
    torch.manual_seed(seed)
    model = BertForSequenceClassification(config)
    model.save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory) -> Path:
    return write_toy_checkpoint(tmp_path_factory.mktemp("ckpt") / "toy")


RATIONALE_ROWS = [
    {
        "sid": "r1",
        "edit_type": "spelling",
        "pre_edit_text": "We recieved the data .",
        "rationale_word_indices": [1],
        "rationale_char_spans": [[3, 11]],
    },
    {
        "sid": "r2",
        "edit_type": "deleted",
        "pre_edit_text": "a naïve model was used",
        "rationale_word_indices": [1],
        "rationale_char_spans": [[2, 8]],
    },
    {
        "sid": "r3",
        "edit_type": "deleted",
        "pre_edit_text": "this method needs _MATH_ and the image",
        "rationale_word_indices": [3],
        "rationale_char_spans": [[18, 24]],
    },
    {
        "sid": "r4",
        "edit_type": "spelling",
        "pre_edit_text": "the results of the model and the data in this sentence",
        "rationale_word_indices": [1],
        "rationale_char_spans": [[4, 11]],
    },
    {
        "sid": "r5",
        "edit_type": "deleted",
        "pre_edit_text": "it is still very clean .",
        "rationale_word_indices": [2],
        "rationale_char_spans": [[6, 11]],
    },
]


@pytest.fixture(scope="session")
def rationale_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "rationales.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for row in RATIONALE_ROWS:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path
