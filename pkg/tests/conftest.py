import re

import pytest

from cldkit import corpus

import helpers


@pytest.fixture(scope="session")
def canonical():
    return corpus.canonical_hei_model()


@pytest.fixture(scope="session")
def unsigned():
    return corpus.load_model("hei-ai-unsigned")


@pytest.fixture(scope="session")
def two_cycle():
    return corpus.load_model("two-cycle")


@pytest.fixture(scope="session")
def b2_model():
    return corpus.load_model("b2")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    status = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
            if m:
                status[int(m.group(1))] = "PASS" if outcome == "passed" else "FAIL"
    if not status:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(helpers.ACCEPTANCE_LABELS):
        verdict = status.get(num, "NOT RUN")
        label = helpers.ACCEPTANCE_LABELS[num]
        terminalreporter.write_line(f"criterion {num}: {verdict} - {label}")
