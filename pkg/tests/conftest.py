import numpy as np
import pytest


def random_siegel_point(rng, n, scale=1.0):
    X = rng.uniform(-0.5, 0.5, (n, n))
    R = rng.normal(size=(n, n)) * 0.3
    Y = R @ R.T + np.eye(n) * rng.uniform(0.8, 1.3)
    return (X + X.T) / 2 + 1j * scale * Y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
