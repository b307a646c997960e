from importlib import resources
from pathlib import Path

import pytest

from editeval.corpus import read_corpus
from editeval.rationales import Dictionary

DATA_DIR = Path(str(resources.files("editeval").joinpath("data")))
MINI_CORPUS = DATA_DIR / "mini_corpus.txt"
DICTIONARY_PATH = DATA_DIR / "reference_dictionary.txt"

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
    # Only record criteria from this suite; other test trees in the same
    # run may reuse the marker for their own summaries.
    if marker is None or item.path.parent != Path(__file__).parent:
        return
    label, description = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance_results[label] = (report.outcome, description)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance_results):
        outcome, description = _acceptance_results[label]
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper()
        )
        terminalreporter.write_line(f"[{word}] {label}: {description}")


@pytest.fixture(scope="session")
def mini_corpus_path():
    return MINI_CORPUS


@pytest.fixture(scope="session")
def dictionary():
    return Dictionary.from_file(DICTIONARY_PATH)


@pytest.fixture(scope="session")
def mini_sentences(mini_corpus_path):
    sentences, report = read_corpus(mini_corpus_path)
    assert not report.record_errors and not report.skipped_lines
    return {s.sid: s for s in sentences}
