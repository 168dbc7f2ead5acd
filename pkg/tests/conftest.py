import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def batch_mean(sketch, items):
    """Mean estimated score of ``items`` recomputed from scratch, one query at a time."""
    if len(items) == 0:
        return 0.0
    return float(np.mean([sketch.score(x).value for x in items]))


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call with (passed, detail)."""

    def record(passed, detail):
        _ACCEPTANCE.append((request.node.name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
