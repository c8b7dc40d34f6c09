import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


def tie_free(rng, d, m, signal=0.0, k_signal=0):
    """Random d x m matrix with all entries distinct; optional shift on row 0."""
    v = rng.standard_normal((d, m))
    if k_signal:
        v[0, :k_signal] += signal
    v = np.round(v, 6) + np.arange(d * m).reshape(d, m) * 1e-9
    assert np.unique(v).size == v.size
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
