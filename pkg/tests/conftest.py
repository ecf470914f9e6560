import numpy as np
import pytest

from productgraph.graph import is_connected, n_edges


def random_connected(rng, p, density=0.6, low=0.1, high=2.0):
    """Random weight vector on ``p`` nodes that is guaranteed connected."""
    while True:
        w = np.where(rng.random(n_edges(p)) < density, rng.uniform(low, high, n_edges(p)), 0.0)
        if p == 1 or is_connected(w, p):
            return w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion."""

    def record(number, passed, detail):
        _CRITERIA[number] = (passed, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
