import re
from pathlib import Path

import pytest

from fitch_mi import parse_module

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def peano_text() -> str:
    return (FIXTURES / "peano.proof").read_text(encoding="utf-8")


@pytest.fixture()
def peano_module(peano_text):
    return parse_module(peano_text)


@pytest.fixture(scope="session")
def fragment_text() -> str:
    """The user-supplied fragment closing the S/S case, without the
    terminating ``.`` line used by the command-line reader."""
    lines = (FIXTURES / "sum_total_comm.responses").read_text(encoding="utf-8").splitlines()
    assert lines[-1].strip() == "."
    return "\n".join(lines[:-1])


@pytest.fixture(scope="session")
def golden_trace() -> str:
    return (FIXTURES / "sum_total_comm_prompt.golden").read_text(encoding="utf-8")


# -- acceptance summary -----------------------------------------------------

CRITERIA = {
    "A1": "modus ponens checks in turnstile and explicit form",
    "A2": "reference module checks end-to-end with embedded prove commands",
    "A3": "every single-reference mutation fails at the mutated line",
    "A4": "search suspends once with the expected prompt, fragment accepted",
    "A5": "gapped and full elaborations re-check; gapped matches the reference",
    "A6": "randomized goals agree with the forward-chaining oracle",
    "A7": "unification and alpha-equivalence properties hold",
    "A8": "S/S goal stuck at every depth, Zero case goals proved at depth 4",
    "A9": "parse after pretty-print is the identity",
    "A10": "wire-protocol replay reproduces the elaborations",
    "A11": "web UI renders deterministically, fragment entry gated on suspension",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, bool] = {}
    for status, passed in (("passed", True), ("failed", False), ("error", False)):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_(a\d+)", rep.nodeid)
            if m:
                key = m.group(1).upper()
                outcomes[key] = outcomes.get(key, True) and passed
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(outcomes, key=lambda k: int(k[1:])):
        verdict = "PASS" if outcomes[key] else "FAIL"
        terminalreporter.write_line(f"{key}: {verdict} - {CRITERIA[key]}")
