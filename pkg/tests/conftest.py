import numpy as np
import pytest
from hypothesis import settings

from thresholdgame.model import Primitives

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def bench():
    """Benchmark primitives: V=1, gamma=2, lambda=1."""
    return Primitives(1.0, 2.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:  # acceptance module not collected
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: int(k.split()[0][1:])):
            terminalreporter.write_line(RESULTS[key])
