"""Placing non-terrestrial backhaul nodes and re-running the infection with them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .analytics import NetworkMetrics, network_metrics
from .clustering import APSet, weighted_kmeans
from .geometry import PlanarPoint, UnitFrame
from .infection import BackhaulGraph, DynamicsTrace, InfectionParams, run_infection

log = logging.getLogger(__name__)


class PlacementStrategy(str, Enum):
    WEIGHTED_FARTHEST_KMEANS = "weighted-farthest-kmeans"
    MANUAL = "manual"


@dataclass(frozen=True)
class NtbnPlan:
    positions: tuple[PlanarPoint, ...] = ()
    placement_strategy: PlacementStrategy = PlacementStrategy.WEIGHTED_FARTHEST_KMEANS

    @property
    def m(self) -> int:
        return len(self.positions)

    @classmethod
    def manual(cls, positions: Sequence[PlanarPoint]) -> "NtbnPlan":
        return cls(tuple(positions), PlacementStrategy.MANUAL)


@dataclass
class SweepRow:
    m: int
    plan: NtbnPlan
    graph: BackhaulGraph
    trace: DynamicsTrace = field(repr=False)
    metrics: NetworkMetrics

    def record(self) -> dict:
        return {"m": self.m, **self.metrics.to_dict()}


def place_ntbns(aps: APSet, terrestrial_bns: Sequence[PlanarPoint], m: int, seed: int) -> NtbnPlan:
    """Cluster the APs, weighted by their distance to the nearest terrestrial BN.

    Remote APs dominate the weights, so the centroids land where long
    multi-hop chains would otherwise form.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m > aps.k:
        raise ValueError(f"cannot place {m} non-terrestrial BNs for {aps.k} APs")
    if m == 0:
        return NtbnPlan()
    axy = aps.xy()
    if terrestrial_bns:
        bxy = np.array([(b.x, b.y) for b in terrestrial_bns], dtype=float)
        dist = np.hypot(axy[:, None, 0] - bxy[None, :, 0], axy[:, None, 1] - bxy[None, :, 1]).min(axis=1)
    else:
        dist = np.ones(len(axy))
    if not (dist > 0).any():
        dist = np.ones(len(axy))
    weighted = [PlanarPoint(float(x), float(y), float(d)) for (x, y), d in zip(axy, dist)]
    clusters = weighted_kmeans(weighted, m, seed)
    if clusters.k_reduced:
        log.warning("only %d distinct AP positions away from BNs; placing %d NTBNs instead of %d", clusters.k, clusters.k, m)
    return NtbnPlan(tuple(PlanarPoint(c.x, c.y) for c in clusters.centers))


def augmented_infection(
    aps: APSet,
    terrestrial_bns: Sequence[PlanarPoint],
    plan: NtbnPlan,
    params: InfectionParams,
    frame: UnitFrame | None = None,
) -> tuple[BackhaulGraph, DynamicsTrace]:
    return run_infection(list(aps.centers), terrestrial_bns, params, plan.positions, frame=frame)


def ntbn_sweep(
    aps: APSet,
    terrestrial_bns: Sequence[PlanarPoint],
    m_values: Sequence[int],
    params: InfectionParams,
    seed: int,
    frame: UnitFrame | None = None,
) -> list[SweepRow]:
    if any(b < a for a, b in zip(m_values, m_values[1:])):
        raise ValueError(f"m_values must be non-decreasing, got {list(m_values)}")
    rows = []
    for m in m_values:
        plan = place_ntbns(aps, terrestrial_bns, m, seed)
        graph, trace = augmented_infection(aps, terrestrial_bns, plan, params, frame)
        rows.append(SweepRow(m, plan, graph, trace, network_metrics(graph)))
    return rows
