import numpy as np
import pytest

from adfest.copulas import STUDY_COPULAS, sample_copula
from adfest.minproj import angular_grid


@pytest.fixture(scope="session")
def grid():
    return angular_grid()


@pytest.fixture(scope="session")
def inv_logistic_sample():
    return sample_copula(STUDY_COPULAS[6], 10_000, seed=[6, 0])


@pytest.fixture(scope="session")
def independent_sample():
    return np.random.default_rng(42).standard_exponential((10_000, 2))


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number, ok, detail):
        results[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
