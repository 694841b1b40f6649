"""Planar geometry helpers: projection, hull and disk-union areas, covering/packing estimates."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

METERS_PER_DEGREE = 111320.0

# grids larger than this are coarsened instead of allocated
MAX_RASTER_CELLS = 16_000_000


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float
    weight: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        if not self.weight >= 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float
    weight: float = 1.0

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")
        if not self.weight >= 0:
            raise ValueError(f"weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class CoveringPackingResult:
    cover_count: int
    packing_count: int
    epsilon: float


def to_arrays(points: Sequence[PlanarPoint]) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(xy, weights)`` arrays of shapes ``(n, 2)`` and ``(n,)``."""
    if len(points) == 0:
        return np.zeros((0, 2)), np.zeros(0)
    xy = np.array([(p.x, p.y) for p in points], dtype=float)
    w = np.array([p.weight for p in points], dtype=float)
    return xy, w


def distinct_positions(points: Sequence[PlanarPoint], positive_only: bool = True) -> int:
    xy, w = to_arrays(points)
    if positive_only:
        xy = xy[w > 0]
    if len(xy) == 0:
        return 0
    return len(np.unique(xy, axis=0))


def project_to_plane(points: Sequence[GeoPoint], reference: GeoPoint) -> list[PlanarPoint]:
    """Equirectangular projection around ``reference``; output in meters."""
    kx = math.cos(math.radians(reference.lat)) * METERS_PER_DEGREE
    return [
        PlanarPoint((p.lon - reference.lon) * kx, (p.lat - reference.lat) * METERS_PER_DEGREE, p.weight)
        for p in points
    ]


def unproject(points: Sequence[PlanarPoint], reference: GeoPoint) -> list[GeoPoint]:
    """Inverse of :func:`project_to_plane`."""
    kx = math.cos(math.radians(reference.lat)) * METERS_PER_DEGREE
    return [
        GeoPoint(reference.lat + p.y / METERS_PER_DEGREE, reference.lon + p.x / kx, p.weight)
        for p in points
    ]


def centroid_reference(points: Sequence[GeoPoint]) -> GeoPoint:
    if not points:
        raise ValueError("cannot take the centroid of an empty point set")
    lat = math.fsum(p.lat for p in points) / len(points)
    lon = math.fsum(p.lon for p in points) / len(points)
    return GeoPoint(lat, lon, 0.0)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(xy: np.ndarray) -> list[tuple[float, float]]:
    """Monotone-chain hull, counter-clockwise, collinear points dropped."""
    pts = sorted(set(map(tuple, np.asarray(xy, dtype=float).tolist())))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull_area(points: Sequence[PlanarPoint]) -> float:
    hull = convex_hull(to_arrays(points)[0])
    if len(hull) < 3:
        return 0.0
    xs = [p[0] for p in hull]
    ys = [p[1] for p in hull]
    # shoelace with centred coordinates to limit cancellation
    cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
    terms = []
    for i in range(len(hull)):
        j = (i + 1) % len(hull)
        terms.append((xs[i] - cx) * (ys[j] - cy) - (xs[j] - cx) * (ys[i] - cy))
    return abs(math.fsum(terms)) / 2.0


def inflated_area(points: Sequence[PlanarPoint], radius: float, resolution: float | None = None) -> float:
    """Area of the union of disks of ``radius`` around each point.

    The plane is rasterised into square cells of side ``resolution``
    (default ``radius / 50``); a cell counts when its centre lies within
    ``radius`` of some point. Sparse inputs stamp each disk into the grid.
    Dense ones use a distance transform of the occupied cells, checking
    only the band where that approximation is ambiguous with a KD-tree.
    """
    if resolution is None:
        resolution = radius / 50.0
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    xy, _ = to_arrays(points)
    if len(xy) == 0:
        return 0.0
    xy = np.unique(xy, axis=0)

    lo = xy.min(axis=0) - radius - resolution
    hi = xy.max(axis=0) + radius + resolution
    shape = np.ceil((hi - lo) / resolution).astype(int) + 1
    if shape[0] * shape[1] > MAX_RASTER_CELLS:
        coarse = math.sqrt((hi - lo).prod() / MAX_RASTER_CELLS) * 1.01
        log.warning("raster too large at %.3g m cells, coarsening to %.3g m", resolution, coarse)
        return inflated_area(points, radius, coarse)

    h = resolution
    reach = int(math.ceil(radius / h)) + 1
    if len(xy) * (2 * reach + 1) ** 2 <= 2 * shape[0] * shape[1]:
        return _stamped_area(xy, radius, lo, shape, h, reach)
    cells = np.floor((xy - lo) / h).astype(int)
    occupied = np.ones(shape, dtype=bool)
    occupied[cells[:, 0], cells[:, 1]] = False
    # distance between cell centres, in metres
    approx = ndimage.distance_transform_edt(occupied) * h
    # a point sits at most h/sqrt(2) from the centre of its own cell
    slack = h / math.sqrt(2.0) + 1e-12 * max(1.0, radius)
    inside = approx <= radius - slack
    band = np.argwhere((approx > radius - slack) & (approx <= radius + slack))
    count = int(inside.sum())
    if len(band):
        centres = lo + (band + 0.5) * h
        d, _ = cKDTree(xy).query(centres, k=1)
        count += int((d <= radius).sum())
    return count * h * h


def _stamped_area(xy: np.ndarray, radius: float, lo: np.ndarray, shape: np.ndarray, h: float, reach: int) -> float:
    grid = np.zeros(shape, dtype=bool)
    r2 = radius * radius
    for px, py in xy:
        ci, cj = int((px - lo[0]) // h), int((py - lo[1]) // h)
        i = np.arange(max(ci - reach, 0), min(ci + reach, shape[0] - 1) + 1)
        j = np.arange(max(cj - reach, 0), min(cj + reach, shape[1] - 1) + 1)
        dx = lo[0] + (i + 0.5) * h - px
        dy = lo[1] + (j + 0.5) * h - py
        grid[i[0]:i[-1] + 1, j[0]:j[-1] + 1] |= (dx * dx)[:, None] + (dy * dy)[None, :] <= r2
    return int(grid.sum()) * h * h


def _pairwise_within(xy: np.ndarray, eps: float) -> list[list[int]]:
    tree = cKDTree(xy)
    return [sorted(nb) for nb in tree.query_ball_point(xy, r=eps)]


def greedy_cover_number(points: Sequence[PlanarPoint], eps: float) -> int:
    """Size of a greedy eps-cover (an upper bound on the covering number).

    The lowest-index uncovered point becomes a centre and covers everything
    within ``eps`` of it.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    xy, _ = to_arrays(points)
    if len(xy) == 0:
        return 0
    neighbours = _pairwise_within(xy, eps)
    covered = np.zeros(len(xy), dtype=bool)
    picks = 0
    for i in range(len(xy)):
        if covered[i]:
            continue
        picks += 1
        covered[neighbours[i]] = True
    return picks


def greedy_packing_number(points: Sequence[PlanarPoint], eps: float) -> int:
    """Size of a greedy eps-packing (a lower bound on the packing number).

    Points are accepted in index order when they are strictly farther than
    ``eps`` from everything accepted so far.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    xy, _ = to_arrays(points)
    if len(xy) == 0:
        return 0
    neighbours = _pairwise_within(xy, eps)
    blocked = np.zeros(len(xy), dtype=bool)
    count = 0
    for i in range(len(xy)):
        if blocked[i]:
            continue
        count += 1
        blocked[neighbours[i]] = True
    return count


def covering_packing(points: Sequence[PlanarPoint], eps: float) -> CoveringPackingResult:
    return CoveringPackingResult(greedy_cover_number(points, eps), greedy_packing_number(points, eps), eps)


@dataclass(frozen=True)
class UnitFrame:
    """Affine map sending a bounding box into the unit square (aspect kept)."""

    x0: float
    y0: float
    scale: float

    @classmethod
    def fit(cls, xy: np.ndarray) -> "UnitFrame":
        xy = np.asarray(xy, dtype=float)
        lo = xy.min(axis=0)
        span = float((xy.max(axis=0) - lo).max())
        return cls(float(lo[0]), float(lo[1]), span if span > 0 else 1.0)

    def forward(self, xy: np.ndarray) -> np.ndarray:
        return (np.asarray(xy, dtype=float) - (self.x0, self.y0)) / self.scale

    def inverse(self, uv: np.ndarray) -> np.ndarray:
        return np.asarray(uv, dtype=float) * self.scale + (self.x0, self.y0)
