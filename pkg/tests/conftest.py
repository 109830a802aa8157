import numpy as np
import pytest

from halfline_nls.spectral_transforms import ComplexField, make_grid

ACCEPTANCE_LINES = []


def report(number: int, title: str, passed: bool, detail: str):
    """Record one acceptance verdict; printed at the end of the session."""
    ACCEPTANCE_LINES.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: "
                                     f"{title} :: {detail}"))
    print(ACCEPTANCE_LINES[-1][1])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def smooth_random_field(grid, rng, n_bumps: int = 4, edge_zero: bool = True):
    """Sum of random Gaussian bumps well inside the box, optionally vanishing at x = 0."""
    x = grid.x
    v = np.zeros_like(x, dtype=complex)
    for _ in range(n_bumps):
        c = rng.uniform(0.2, 0.45) * grid.length
        w = rng.uniform(0.5, 1.5)
        k = rng.uniform(-2, 2)
        a = rng.normal() + 1j * rng.normal()
        v += a * np.exp(-((x - c) / w) ** 2 + 1j * k * x)
    if not edge_zero:
        v += (rng.normal() + 1j * rng.normal()) * np.exp(-x ** 2)
    return ComplexField(grid, v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid40():
    return make_grid(40.0, 1024)
