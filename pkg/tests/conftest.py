import numpy as np
import pytest

from akahler import zoo


def richardson(f, x, h=1e-3):
    """Fourth-order central difference of a scalar function of one variable."""
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def fd_partial(field, p, k, h=1e-3):
    """d field / d x_k at p by Richardson extrapolation; field takes a list of floats."""
    p = np.asarray(p, dtype=float)

    def along(t):
        q = p.copy()
        q[k] = t
        return np.asarray(field(list(q)), dtype=float)

    return richardson(along, p[k], h)


def all_charts():
    return [
        zoo.flat_kahler(1),
        zoo.flat_kahler(2),
        zoo.flat_kahler(3),
        zoo.kodaira_thurston(),
        zoo.symplectic_twist_r4(0.0),
        zoo.symplectic_twist_r4(0.1),
        zoo.symplectic_twist_r4(0.3),
    ]


@pytest.fixture(scope="session")
def kt():
    return zoo.kodaira_thurston()


@pytest.fixture(scope="session")
def flat():
    return zoo.flat_kahler(2)


@pytest.fixture(scope="session")
def twist():
    return zoo.symplectic_twist_r4(0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def acceptance_line(number, passed: bool, summary: str) -> str:
    """Record and print one acceptance verdict line."""
    line = f"acceptance criterion {number}: {'PASS' if passed else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
