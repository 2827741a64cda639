import time

import numpy as np
import pytest

_ACCEPTANCE_LINES = []
_START = []
SUITE_LIMIT_S = 120


def pytest_sessionstart(session):
    _START.append(time.perf_counter())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report():
    """Collects one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        dt = time.perf_counter() - _START[0]
        tag = "PASS" if dt < SUITE_LIMIT_S else "FAIL"
        terminalreporter.write_line(f"suite runtime {tag} {dt:.1f}s for all collected tests (limit {SUITE_LIMIT_S}s)")
