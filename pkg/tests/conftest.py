"""Shared fixtures and the acceptance-criterion result banner."""
import numpy as np
import pytest

# test_acceptance.py registers one entry per criterion: (number, title, passed)
CRITERION_RESULTS: dict[int, tuple[str, bool]] = {}


def record_criterion(number: int, title: str, passed: bool) -> None:
    CRITERION_RESULTS[number] = (title, passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERION_RESULTS):
        title, passed = CRITERION_RESULTS[number]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} [{word}] {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
