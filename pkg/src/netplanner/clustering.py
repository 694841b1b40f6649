"""Weighted k-means placement and the connectivity ratio of an AP set."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import PlanarPoint, to_arrays

log = logging.getLogger(__name__)

MAX_ITER = 300


class UndefinedRatioError(ValueError):
    """Raised when the connectivity ratio is requested for zero total weight."""


@dataclass(frozen=True)
class APSet:
    centers: tuple[PlanarPoint, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        if len(self.centers) < 1:
            raise ValueError("an AP set needs at least one center")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")

    @property
    def k(self) -> int:
        return len(self.centers)

    def xy(self) -> np.ndarray:
        return np.array([(c.x, c.y) for c in self.centers], dtype=float)


@dataclass(frozen=True)
class CoverageReport:
    covered_indices: frozenset[int]
    covered_weight: float
    total_weight: float
    rho: float


@dataclass
class ClusterResult:
    """Output of :func:`weighted_kmeans`.

    ``centers`` carry the total user weight of their cluster in ``weight``.
    ``k_reduced`` is set when fewer distinct positions than the requested
    ``k`` were available.
    """

    centers: list[PlanarPoint]
    labels: np.ndarray
    requested_k: int
    iterations: int
    k_reduced: bool = field(default=False)

    @property
    def k(self) -> int:
        return len(self.centers)

    def to_apset(self, radius: float) -> APSet:
        return APSet(tuple(self.centers), radius)


def _sq_dist(xy: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeanspp(xy: np.ndarray, w: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Weighted k-means++ seeding over positive-weight points."""
    n = len(xy)
    chosen = [int(rng.choice(n, p=w / w.sum()))]
    d2 = _sq_dist(xy, xy[chosen]).min(axis=1)
    for _ in range(1, k):
        score = w * d2
        total = score.sum()
        if total <= 0:
            break
        idx = int(rng.choice(n, p=score / total))
        chosen.append(idx)
        d2 = np.minimum(d2, _sq_dist(xy, xy[[idx]])[:, 0])
    return xy[chosen].copy()


def weighted_kmeans(users: Sequence[PlanarPoint], k: int, seed: int) -> ClusterResult:
    """Lloyd's algorithm with weight-scaled centroids and weighted k-means++ init.

    Deterministic for fixed ``(users, k, seed)``. Zero-weight users are
    assigned labels but never pull a centroid. Empty clusters are re-seeded
    at the positive-weight user farthest from its assigned center.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    xy_all, w_all = to_arrays(users)
    pos = w_all > 0
    if not pos.any():
        raise ValueError("weighted k-means needs at least one user with positive weight")
    xy, w = xy_all[pos], w_all[pos]

    n_distinct = len(np.unique(xy, axis=0))
    requested = k
    if k > n_distinct:
        log.warning("k=%d exceeds %d distinct user positions; reducing k", k, n_distinct)
        k = n_distinct

    rng = np.random.default_rng(seed)
    centers = _kmeanspp(xy, w, k, rng)
    labels = np.full(len(xy), -1)
    it = 0
    for it in range(1, MAX_ITER + 1):
        d2 = _sq_dist(xy, centers)
        new_labels = np.argmin(d2, axis=1)
        mass = np.bincount(new_labels, weights=w, minlength=k)
        for empty in np.flatnonzero(mass == 0):
            # farthest positive-weight point from its own center, lowest index on ties
            own = d2[np.arange(len(xy)), new_labels]
            far = int(np.argmax(own))
            if own[far] == 0:
                taken = {tuple(c) for c in centers}
                far = next(i for i in range(len(xy)) if tuple(xy[i]) not in taken)
            centers[empty] = xy[far]
            d2 = _sq_dist(xy, centers)
            new_labels = np.argmin(d2, axis=1)
            mass = np.bincount(new_labels, weights=w, minlength=k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sx = np.bincount(labels, weights=w * xy[:, 0], minlength=k)
        sy = np.bincount(labels, weights=w * xy[:, 1], minlength=k)
        centers = np.column_stack([sx / mass, sy / mass])

    mass = np.bincount(labels, weights=w, minlength=k)
    full_labels = np.full(len(xy_all), -1)
    full_labels[pos] = labels
    if (~pos).any():
        full_labels[~pos] = np.argmin(_sq_dist(xy_all[~pos], centers), axis=1)
    out = [PlanarPoint(float(cx), float(cy), float(m)) for (cx, cy), m in zip(centers, mass)]
    return ClusterResult(out, full_labels, requested, it, k_reduced=k < requested)


def covered_users(aps: APSet, users: Sequence[PlanarPoint]) -> CoverageReport:
    xy, w = to_arrays(users)
    total = float(w.sum())
    if len(xy) == 0:
        return CoverageReport(frozenset(), 0.0, 0.0, 0.0)
    c = aps.xy()
    dist = np.hypot(xy[:, None, 0] - c[None, :, 0], xy[:, None, 1] - c[None, :, 1])
    hit = (dist <= aps.radius).any(axis=1)
    covered = float(w[hit].sum())
    rho = covered * covered / (aps.k * total) if total > 0 else 0.0
    return CoverageReport(frozenset(np.flatnonzero(hit).tolist()), covered, total, rho)


def connectivity_ratio(aps: APSet, users: Sequence[PlanarPoint]) -> float:
    """Squared covered weight over (number of APs x total weight).

    With unit weights this is covered-users squared over APs times users.
    """
    report = covered_users(aps, users)
    if not report.total_weight > 0:
        raise UndefinedRatioError("connectivity ratio undefined for zero total user weight")
    return report.rho
