import math

import numpy as np
import pytest

from netplanner.geometry import PlanarPoint

ACCEPTANCE_LINES: list[str] = []


def pts(*coords, w=1.0):
    return [PlanarPoint(float(x), float(y), w) for x, y in coords]


def random_points(rng: np.random.Generator, n: int, scale: float = 1.0, weights: bool = False):
    xy = rng.random((n, 2)) * scale
    w = rng.integers(1, 10, size=n) if weights else np.ones(n)
    return [PlanarPoint(float(x), float(y), float(wi)) for (x, y), wi in zip(xy, w)]


def brute_cover_number(xy: np.ndarray, eps: float) -> int:
    """Smallest subset of the points whose eps-balls cover all of them (enumeration)."""
    from itertools import combinations

    n = len(xy)
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    for size in range(1, n + 1):
        for combo in combinations(range(n), size):
            if (d[list(combo)] <= eps).any(axis=0).all():
                return size
    return n


def brute_packing_number(xy: np.ndarray, eps: float) -> int:
    from itertools import combinations

    n = len(xy)
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    best = 1 if n else 0
    for size in range(2, n + 1):
        found = False
        for combo in combinations(range(n), size):
            sub = d[np.ix_(combo, combo)]
            if (sub[np.triu_indices(size, 1)] > eps).all():
                found = True
                break
        if not found:
            break
        best = size
    return best


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def close(a, b, rel=1e-9):
    return math.isclose(a, b, rel_tol=rel, abs_tol=rel)
