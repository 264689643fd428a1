import numpy as np
import pytest

from cvdg.gaussian import random_covariance
from cvdg.phasespace import random_mode

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state_and_mode(rng, m=None, pure=False):
    m = m or int(rng.integers(1, 5))
    return random_covariance(m, rng, pure=pure), random_mode(m, rng)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
