import functools

import numpy as np
import pytest

from bfspectrum import asymptotics, blockdiag, katoreduce


@functools.lru_cache(maxsize=None)
def reduced(mu, eps, N=32):
    """Cached full reduction; tests must not mutate the result."""
    return katoreduce.reduce_point(mu, eps, N=N)


@functools.lru_cache(maxsize=None)
def decomposed(mu, eps, N=32):
    red = reduced(mu, eps, N)
    return blockdiag.block_decompose(red.blocks, mu)


# (eps, mu) grid used by several suites: mu in {0.5, 1, 2, 3} * eps
GRID = [(eps, f * eps) for eps in (0.005, 0.01, 0.02) for f in (0.5, 1, 2, 3)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@functools.lru_cache(maxsize=None)
def boundary(eps):
    return asymptotics.critical_mu(eps)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    def _report(key, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}"
        ACCEPTANCE_LINES[key] = line
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
