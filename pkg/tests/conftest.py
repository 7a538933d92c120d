import sys
from pathlib import Path

import mpmath
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hankel_p3.precision import PrecisionConfig


@pytest.fixture
def prec256():
    return PrecisionConfig(256, 64)


def close(a, b, tol):
    """Relative closeness with an absolute floor of 1."""
    return abs(a - b) <= tol * max(1, abs(b))


@pytest.fixture
def approx():
    return close


@pytest.fixture(autouse=True)
def _reference_precision():
    """Expected values in tests are formed at 256 bits; the library sets its own precision."""
    old = mpmath.mp.prec
    mpmath.mp.prec = 256
    yield
    mpmath.mp.prec = old


def pytest_terminal_summary(terminalreporter):
    import acceptance_log
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
