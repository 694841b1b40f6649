"""Choosing how many APs to deploy and where.

The number of APs is searched in a window around an estimate of the
2R-packing number of the users; the estimate comes from over-clustering
and then discounting clusters whose coverage disks overlap.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .clustering import APSet, ClusterResult, connectivity_ratio, weighted_kmeans
from .geometry import PlanarPoint, distinct_positions, inflated_area


@dataclass(frozen=True)
class PlanConfig:
    radius: float
    kappa: int = 10
    seed: int = 0
    k0_override: int | None = None
    raster_resolution: float | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.k0_override is not None and self.k0_override < 1:
            raise ValueError(f"k0_override must be >= 1, got {self.k0_override}")


@dataclass
class SearchTrace:
    k0: int
    k_hat: int
    evaluated: list[tuple[int, float]] = field(default_factory=list)
    k_star: int = 0
    rho_star: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["evaluated"] = [[k, rho] for k, rho in self.evaluated]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SearchTrace":
        return cls(d["k0"], d["k_hat"], [(int(k), float(r)) for k, r in d["evaluated"]], d["k_star"], d["rho_star"])


def cluster_seed(seed: int, k: int) -> int:
    return seed ^ k


def clusters_for_k(users: Sequence[PlanarPoint], k: int, seed: int) -> ClusterResult:
    """Clustering used for every k: weighted k-means seeded with ``seed ^ k``."""
    return weighted_kmeans(users, k, cluster_seed(seed, k))


def initial_k0(users: Sequence[PlanarPoint], radius: float, resolution: float | None = None) -> int:
    """Upper estimate of the R-covering number from the R/2-inflated area."""
    if not users:
        raise ValueError("initial_k0 needs at least one user")
    half = radius / 2.0
    area = inflated_area(users, half, resolution if resolution is not None else half / 50.0)
    k0 = math.ceil(4.0 * area / (math.pi * radius * radius))
    return max(1, min(k0, distinct_positions(users)))


def prune_overlaps(aps: APSet) -> int:
    """k_hat = k0 - N + 1, N counting centers with a later neighbour within 2R."""
    xy = aps.xy()
    n_overlap = 0
    remaining = list(range(aps.k))
    for i in range(aps.k):
        remaining.remove(i)
        for j in remaining:
            if math.hypot(xy[i, 0] - xy[j, 0], xy[i, 1] - xy[j, 1]) <= 2.0 * aps.radius:
                n_overlap += 1
                break
    return max(1, aps.k - n_overlap + 1)


def search_window(k_hat: int, kappa: int, k_limit: int) -> range:
    hi = max(1, min(k_hat + kappa, k_limit))
    lo = min(max(1, k_hat - kappa), hi)
    return range(lo, hi + 1)


def search_k_star(
    users: Sequence[PlanarPoint], radius: float, k_hat: int, kappa: int, seed: int, k0: int | None = None
) -> SearchTrace:
    """Exhaustive search of rho(clusters_for_k(k)) over the window around ``k_hat``.

    The window is clamped to ``[1, distinct user positions]``; ties go to
    the smaller k.
    """
    if k_hat < 1:
        raise ValueError(f"k_hat must be >= 1, got {k_hat}")
    trace = SearchTrace(k0=k0 if k0 is not None else k_hat, k_hat=k_hat)
    best_k, best_rho = 0, -1.0
    for k in search_window(k_hat, kappa, distinct_positions(users)):
        clusters = clusters_for_k(users, k, seed)
        rho = connectivity_ratio(clusters.to_apset(radius), users)
        trace.evaluated.append((k, rho))
        if rho > best_rho:
            best_k, best_rho = k, rho
    trace.k_star, trace.rho_star = best_k, best_rho
    return trace


def plan_aps(users: Sequence[PlanarPoint], config: PlanConfig) -> tuple[APSet, SearchTrace]:
    if not users:
        raise ValueError("plan_aps needs at least one user")
    R = config.radius
    if config.k0_override is not None:
        k0 = min(config.k0_override, distinct_positions(users))
    else:
        k0 = initial_k0(users, R, config.raster_resolution)
    first = clusters_for_k(users, k0, config.seed)
    k_hat = prune_overlaps(first.to_apset(R))
    trace = search_k_star(users, R, k_hat, config.kappa, config.seed, k0=first.k)
    final = clusters_for_k(users, trace.k_star, config.seed)
    return final.to_apset(R), trace
