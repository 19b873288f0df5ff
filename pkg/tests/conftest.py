import numpy as np
import pytest

from deformed_abelian import Params

ACCEPTANCE = {}


def record(criterion, passed, detail):
    line = f"criterion {criterion:>3}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE[key])


def random_beta(rng, n, spread=1.5, gap=0.25):
    while True:
        beta = np.sort(rng.uniform(-spread, spread, 2 * n))
        if np.min(np.diff(beta)) > gap:
            return tuple(beta)


@pytest.fixture
def params2():
    return Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
