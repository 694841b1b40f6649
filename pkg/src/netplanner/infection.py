"""Backhaul graph generation by competing infection fronts.

Every backhaul node starts infected. Each infected vertex sweeps a circle
whose radius grows by ``delta * speed`` per time step, with
``speed = alpha + beta / (1 + gamma * r**2)``. An uninfected AP strictly
inside some circle becomes infected, links to the vertex that reached it
and starts its own front on the following step.

Because every front follows the same radius sequence from the moment its
vertex is infected, the simulation can jump from one capture step to the
next without changing the result. :func:`run_infection` does that by
default; ``method="step"`` replays every step through :func:`step`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .geometry import PlanarPoint, UnitFrame

DEFAULT_MAX_STEPS = 1_000_000


class InfectionTimeout(RuntimeError):
    def __init__(self, uninfected: list[str], steps: int):
        self.uninfected = uninfected
        self.steps = steps
        super().__init__(f"{len(uninfected)} AP(s) still uninfected after {steps} steps: {', '.join(uninfected[:10])}")


class VertexKind(str, Enum):
    AP = "ap"
    BN = "bn"
    NTBN = "ntbn"

    @property
    def is_backhaul(self) -> bool:
        return self is not VertexKind.AP


@dataclass(frozen=True)
class InfectionParams:
    alpha: float = 0.01
    beta: float = 0.15
    gamma: float = 4.4e5
    delta: float = 0.01
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


def speed_of(r, params: InfectionParams):
    """Front speed at radius ``r``; works on floats and arrays."""
    return params.alpha + params.beta / (1.0 + params.gamma * (r * r))


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: VertexKind
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    length: float
    length_normalized: float


@dataclass
class BackhaulGraph:
    vertices: list[Vertex]
    edges: list[Edge]

    @property
    def ap_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.vertices) if v.kind is VertexKind.AP]

    @property
    def bn_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.vertices) if v.kind.is_backhaul]

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            adj[e.source].append(e.target)
            adj[e.target].append(e.source)
        return adj


@dataclass
class InfectionState:
    """Per-vertex front state; ``step`` is the index of the last completed step."""

    infected: np.ndarray
    infected_step: np.ndarray
    radius: np.ndarray
    speed: np.ndarray
    infector: np.ndarray
    step: int = 0

    @classmethod
    def initial(cls, n_vertices: int, seeds: Sequence[int], params: InfectionParams) -> "InfectionState":
        state = cls(
            infected=np.zeros(n_vertices, dtype=bool),
            infected_step=np.full(n_vertices, -1),
            radius=np.zeros(n_vertices),
            speed=np.zeros(n_vertices),
            infector=np.full(n_vertices, -1),
        )
        idx = np.asarray(list(seeds), dtype=int)
        state.infected[idx] = True
        state.infected_step[idx] = 0
        state.speed[idx] = speed_of(0.0, params)
        return state


def _pairwise(xy: np.ndarray) -> np.ndarray:
    return np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])


def step(
    state: InfectionState, positions: np.ndarray, params: InfectionParams
) -> tuple[InfectionState, list[tuple[int, int]]]:
    """Advance one time step in place; return the state and the new (infector, target) edges.

    Fronts of vertices infected before this step grow first. Any uninfected
    vertex strictly inside one or more fronts is captured; with several
    fronts the one that overshoots it most wins, then the lower index.
    Captured vertices start with radius 0 and begin growing next step.
    """
    j = state.step + 1
    active = np.flatnonzero(state.infected)
    targets = np.flatnonzero(~state.infected)
    state.radius[active] = state.radius[active] + params.delta * state.speed[active]

    edges: list[tuple[int, int]] = []
    if len(targets) and len(active):
        pos = np.asarray(positions, dtype=float)
        d = np.hypot(
            pos[active, None, 0] - pos[None, targets, 0], pos[active, None, 1] - pos[None, targets, 1]
        )
        over = state.radius[active][:, None] - d
        hit = d < state.radius[active][:, None]
        for col in np.flatnonzero(hit.any(axis=0)):
            # argmax returns the first (lowest-index) maximum
            row = int(np.argmax(np.where(hit[:, col], over[:, col], -np.inf)))
            i, a = int(active[row]), int(targets[col])
            edges.append((i, a))
            state.infected[a] = True
            state.infected_step[a] = j
            state.radius[a] = 0.0
            state.speed[a] = speed_of(0.0, params)
            state.infector[a] = i

    state.speed[active] = speed_of(state.radius[active], params)
    state.step = j
    return state, edges


def radius_sequence(params: InfectionParams, reach: float, limit: int | None = None) -> np.ndarray:
    """Radii ``r[0..n]`` of a single front, from infection until it first exceeds ``reach``.

    Uses exactly the float operations of :func:`step`, so ``r[n]`` equals the
    radius a front holds ``n`` steps after its vertex was infected.
    """
    limit = params.max_steps if limit is None else limit
    out = [0.0]
    r = 0.0
    s = speed_of(0.0, params)
    delta = params.delta
    while r <= reach and len(out) <= limit:
        r = r + delta * s
        s = speed_of(r, params)
        out.append(r)
    return np.array(out)


@dataclass
class DynamicsTrace:
    """Radius and speed of every vertex at every step, derived on demand."""

    params: InfectionParams
    radii: np.ndarray
    infected_step: np.ndarray
    vertex_ids: list[str]
    final_step: int

    def radius(self, vertex: int, j: int) -> float:
        j0 = int(self.infected_step[vertex])
        if j0 < 0 or j < j0:
            return 0.0
        return float(self._radii_upto(j - j0)[j - j0])

    def speed(self, vertex: int, j: int) -> float:
        j0 = int(self.infected_step[vertex])
        if j0 < 0 or j < j0:
            return 0.0
        return float(speed_of(self.radius(vertex, j), self.params))

    def _radii_upto(self, n: int) -> np.ndarray:
        if n >= len(self.radii):
            extra = radius_sequence(self.params, math.inf, limit=n)
            self.radii = extra
        return self.radii

    def vertex_series(self, vertex: int, last: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Radius and speed from the infection step of ``vertex`` through ``last``."""
        last = self.final_step if last is None else last
        j0 = int(self.infected_step[vertex])
        if j0 < 0 or last < j0:
            return np.zeros(0), np.zeros(0)
        r = self._radii_upto(last - j0)[: last - j0 + 1]
        return r, speed_of(r, self.params)

    def rows(self, stride: int = 1) -> Iterator[tuple[int, str, float, float, int]]:
        """``(step, vertex_id, radius, speed, infected_flag)`` rows, step-major."""
        self._radii_upto(self.final_step)
        for j in range(0, self.final_step + 1, stride):
            for v, vid in enumerate(self.vertex_ids):
                j0 = int(self.infected_step[v])
                if 0 <= j0 <= j:
                    r = float(self.radii[j - j0])
                    yield j, vid, r, float(speed_of(r, self.params)), 1
                else:
                    yield j, vid, 0.0, 0.0, 0


def _default_ids(kinds: Sequence[VertexKind]) -> list[str]:
    counters: dict[VertexKind, int] = {}
    ids = []
    for kind in kinds:
        n = counters.get(kind, 0)
        counters[kind] = n + 1
        ids.append(f"{kind.value.upper()}{n}")
    return ids


def build_vertices(
    aps: Sequence[PlanarPoint], bns: Sequence[PlanarPoint], ntbns: Sequence[PlanarPoint] = ()
) -> list[Vertex]:
    """Terrestrial BNs first, then non-terrestrial BNs, then APs."""
    kinds = [VertexKind.BN] * len(bns) + [VertexKind.NTBN] * len(ntbns) + [VertexKind.AP] * len(aps)
    pts = list(bns) + list(ntbns) + list(aps)
    return [Vertex(vid, kind, p.x, p.y) for vid, kind, p in zip(_default_ids(kinds), kinds, pts)]


def _event_driven(
    d: np.ndarray, seeds: np.ndarray, params: InfectionParams
) -> tuple[np.ndarray, np.ndarray, int, np.ndarray]:
    """Capture step and infector of every vertex, jumping between capture steps."""
    n = len(d)
    infected_step = np.full(n, -1)
    infector = np.full(n, -1)
    infected_step[seeds] = 0
    pending = np.ones(n, dtype=bool)
    pending[seeds] = False
    if not pending.any():
        return infected_step, infector, 0, radius_sequence(params, 0.0)

    reach = float(d[:, pending].max())
    radii = radius_sequence(params, reach)
    never = np.iinfo(np.int64).max

    best_step = np.full(n, never, dtype=np.int64)
    best_over = np.full(n, -np.inf)
    best_src = np.full(n, -1)
    frontier = np.sort(seeds)
    last = 0
    while pending.any():
        targets = np.flatnonzero(pending)
        for i in frontier:
            dist = d[i, targets]
            k = np.searchsorted(radii, dist, side="right")
            ok = k < len(radii)
            cand = np.where(ok, infected_step[i] + k, never)
            over = np.where(ok, radii[np.minimum(k, len(radii) - 1)] - dist, -np.inf)
            cur_s, cur_o, cur_i = best_step[targets], best_over[targets], best_src[targets]
            better = (cand < cur_s) | (
                (cand == cur_s) & ((over > cur_o) | ((over == cur_o) & (i < cur_i)))
            )
            better &= ok
            t = targets[better]
            best_step[t], best_over[t], best_src[t] = cand[better], over[better], i
        nxt = int(best_step[targets].min())
        if nxt == never or nxt > params.max_steps:
            last = params.max_steps
            break
        caught = targets[best_step[targets] == nxt]
        infected_step[caught] = nxt
        infector[caught] = best_src[caught]
        pending[caught] = False
        frontier = caught
        last = nxt
    return infected_step, infector, last, radii


def run_infection(
    aps: Sequence[PlanarPoint],
    bns: Sequence[PlanarPoint],
    params: InfectionParams,
    ntbns: Sequence[PlanarPoint] = (),
    *,
    frame: UnitFrame | None = None,
    method: str = "event",
) -> tuple[BackhaulGraph, DynamicsTrace]:
    """Connect every AP to a backhaul node through infection dynamics.

    Coordinates are used as given unless ``frame`` is supplied, in which
    case the fronts run in the frame's normalized coordinates while the
    returned vertices and ``Edge.length`` stay in the input units.
    """
    if len(bns) + len(ntbns) == 0:
        raise ValueError("infection needs at least one backhaul node")
    vertices = build_vertices(aps, bns, ntbns)
    xy = np.array([(v.x, v.y) for v in vertices], dtype=float)
    uv = frame.forward(xy) if frame is not None else xy
    seeds = np.arange(len(bns) + len(ntbns))
    ids = [v.id for v in vertices]

    if method == "event":
        infected_step, infector, last, radii = _event_driven(_pairwise(uv), seeds, params)
    elif method == "step":
        state = InfectionState.initial(len(vertices), seeds, params)
        while not state.infected.all() and state.step < params.max_steps:
            step(state, uv, params)
        infected_step, infector, last = state.infected_step, state.infector, state.step
        radii = radius_sequence(params, math.inf, limit=last)
    else:
        raise ValueError(f"unknown method {method!r}")

    missing = [ids[i] for i in np.flatnonzero(infected_step < 0)]
    if missing:
        raise InfectionTimeout(missing, params.max_steps)

    edges = []
    for a in sorted(np.flatnonzero(infector >= 0), key=lambda a: (infected_step[a], a)):
        i = int(infector[a])
        length = math.hypot(xy[i, 0] - xy[a, 0], xy[i, 1] - xy[a, 1])
        norm = math.hypot(uv[i, 0] - uv[a, 0], uv[i, 1] - uv[a, 1])
        edges.append(Edge(i, int(a), length, norm))
    trace = DynamicsTrace(params, radii, infected_step.copy(), ids, last)
    return BackhaulGraph(vertices, edges), trace


def steps_bound(max_distance: float, params: InfectionParams) -> int:
    """Upper bound on the steps any front needs to cover ``max_distance``."""
    return math.ceil(max_distance / (params.alpha * params.delta)) + 1


def optimal_forest(
    aps: Sequence[PlanarPoint], bns: Sequence[PlanarPoint]
) -> tuple[list[tuple[int, int, float]], float]:
    """Minimum total-length forest linking every AP to some BN.

    Vertex indices follow :func:`build_vertices` (BNs first, then APs). All
    BNs are merged into one root and Kruskal's algorithm is run on the
    complete graph; an AP-root edge goes to the nearest BN (lowest index on
    ties).
    """
    if not bns:
        raise ValueError("optimal_forest needs at least one backhaul node")
    nb, na = len(bns), len(aps)
    bxy = np.array([(p.x, p.y) for p in bns], dtype=float)
    axy = np.array([(p.x, p.y) for p in aps], dtype=float).reshape(-1, 2)

    heap: list[tuple[float, int, int]] = []
    root = -1
    for a in range(na):
        dist = np.hypot(bxy[:, 0] - axy[a, 0], bxy[:, 1] - axy[a, 1])
        heap.append((float(dist.min()), root, a))
        for b in range(a + 1, na):
            heap.append((math.hypot(axy[a, 0] - axy[b, 0], axy[a, 1] - axy[b, 1]), a, b))
    heapq.heapify(heap)

    parent = list(range(na + 1))  # slot na is the merged root

    def find(u: int) -> int:
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    chosen: list[tuple[int, int, float]] = []
    while heap and len(chosen) < na:
        w, u, v = heapq.heappop(heap)
        ru, rv = find(na if u == root else u), find(v)
        if ru == rv:
            continue
        parent[ru] = rv
        if u == root:
            dist = np.hypot(bxy[:, 0] - axy[v, 0], bxy[:, 1] - axy[v, 1])
            chosen.append((int(np.argmin(dist)), nb + v, w))
        else:
            chosen.append((nb + u, nb + v, w))
    return chosen, math.fsum(e[2] for e in chosen)
