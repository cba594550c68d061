import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fieldsaddles.finder import SearchParams, newton_refine, search  # noqa: E402
from fieldsaddles.model import hessian, potential_energy  # noqa: E402

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def _small_search(n, n_starts):
    return search(n, SearchParams(n_starts=n_starts, rng_seed=1))


@pytest.fixture(scope="session")
def small_search():
    """Cached moderate-budget enumeration, enough for every labelled reference state."""
    return lambda n, n_starts=20_000: _small_search(n, n_starts)


def pytest_sessionstart(session):
    # compile the numba kernels once so timed checks measure computation only
    pos = [[0.7, 0.0, 1.1], [-0.7, 0.0, 1.1]]
    potential_energy(pos)
    hessian(pos)
    newton_refine(pos)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
