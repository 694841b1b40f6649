"""Synthetic settlements for tests, demos and the golden scenario."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .geometry import PlanarPoint


def village(
    rng: np.random.Generator, center: tuple[float, float], radius: float, n: int, max_weight: int = 20
) -> list[PlanarPoint]:
    """``n`` populated cells spread uniformly over a disk."""
    r = radius * np.sqrt(rng.random(n))
    t = 2 * np.pi * rng.random(n)
    w = rng.integers(1, max_weight + 1, size=n)
    return [
        PlanarPoint(float(center[0] + ri * np.cos(ti)), float(center[1] + ri * np.sin(ti)), float(wi))
        for ri, ti, wi in zip(r, t, w)
    ]


def settlements(
    seed: int, specs: Sequence[tuple[float, float, float, int]], max_weight: int = 20
) -> list[PlanarPoint]:
    """Concatenate villages given as ``(cx, cy, radius, n)``."""
    rng = np.random.default_rng(seed)
    out: list[PlanarPoint] = []
    for cx, cy, rad, n in specs:
        out.extend(village(rng, (cx, cy), rad, n, max_weight))
    return out


# three dense villages around the tower plus one remote hamlet, metres
GOLDEN_VILLAGES = (
    (0.0, 0.0, 2500.0, 600),
    (7000.0, 1000.0, 2000.0, 400),
    (2500.0, 6500.0, 1800.0, 350),
    (16000.0, 12000.0, 600.0, 40),
)
GOLDEN_BN = PlanarPoint(0.0, 0.0)
GOLDEN_SEED = 7
GOLDEN_RADIUS = 600.0
GOLDEN_NTBN_COUNTS = (0, 1, 2, 3, 4)


def golden_population() -> list[PlanarPoint]:
    return settlements(GOLDEN_SEED, GOLDEN_VILLAGES)


def write_population_csv(path, points: Sequence[PlanarPoint]) -> None:
    lines = ["x,y,population"] + [f"{p.x!r},{p.y!r},{p.weight:g}" for p in points]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
