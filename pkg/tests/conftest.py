import os

import pytest
from hypothesis import HealthCheck, settings

from orbindex.corpus import reference_models

settings.register_profile(
    "exact",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("thorough", parent=settings.get_profile("exact"), max_examples=200)
settings.load_profile(os.environ.get("ORBINDEX_HYPOTHESIS_PROFILE", "exact"))

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE_LINES = {}


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES[number] = (title, passed, detail)
    status = "PASS" if passed else "FAIL"
    print(f"criterion {number:2d} {status}: {title}" + (f" [{detail}]" if detail else ""))


@pytest.fixture(scope="session")
def rank_one_models():
    return reference_models(1, hbar_trunc=3, weight_trunc=8)


@pytest.fixture(scope="session")
def rank_two_models():
    return reference_models(2, hbar_trunc=3, weight_trunc=8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        title, passed, detail = ACCEPTANCE_LINES[number]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} {status}: {title}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
