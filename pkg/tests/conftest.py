import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from firey_lab.geometry import CircleGrid, ProfileSupport

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def grid256():
    return CircleGrid(256)


@pytest.fixture
def grid1024():
    return CircleGrid(1024)


def smooth_profile(coefs, N=256, base=1.0, shift=(0.0, 0.0)):
    """base + sum_k c_k cos k phi + d_k sin k phi for k >= 2, scaled to stay convex."""
    grid = CircleGrid(N)
    phi = grid.angles
    coefs = np.asarray(coefs, dtype=np.float64)
    coefs = np.append(coefs, np.zeros(coefs.size % 2)).reshape(-1, 2)
    ks = np.arange(2, 2 + coefs.shape[0])
    weight = np.sum((ks**2 - 1)[:, None] * np.abs(coefs))
    if weight > 0.5 * base:
        coefs = coefs * 0.5 * base / weight
    h = base + sum(c[0] * np.cos(k * phi) + c[1] * np.sin(k * phi) for k, c in zip(ks, coefs))
    h = h + grid.u @ np.asarray(shift, dtype=np.float64)
    return ProfileSupport(grid, h)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
