"""Network-quality metrics of a generated backhaul forest."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass
from typing import Sequence

from .infection import BackhaulGraph


class CorruptGraphError(ValueError):
    """An AP has no path to any backhaul node."""


@dataclass(frozen=True)
class NetworkMetrics:
    average_hop_count: float
    max_hop_count: int
    per_bn_ap_count: dict[str, int]
    mean_bn_load: float
    max_bn_load: int
    fairness: float
    total_backhaul_length: float

    def to_dict(self) -> dict:
        return asdict(self)


def _bfs_from_backhaul(graph: BackhaulGraph) -> tuple[list[int], list[int]]:
    """Hop distance and rooting BN for every vertex (-1 when unreachable)."""
    n = len(graph.vertices)
    hops, root = [-1] * n, [-1] * n
    adj = graph.adjacency()
    queue: deque[int] = deque()
    for b in graph.bn_indices:
        hops[b], root[b] = 0, b
        queue.append(b)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if hops[v] < 0:
                hops[v], root[v] = hops[u] + 1, root[u]
                queue.append(v)
    return hops, root


def hop_counts(graph: BackhaulGraph) -> tuple[dict[str, int], float]:
    """Per-AP hop count to its rooting BN and the mean over APs."""
    hops, _ = _bfs_from_backhaul(graph)
    per_ap = {}
    for a in graph.ap_indices:
        if hops[a] < 0:
            raise CorruptGraphError(f"AP {graph.vertices[a].id} is not connected to any backhaul node")
        per_ap[graph.vertices[a].id] = hops[a]
    mean = sum(per_ap.values()) / len(per_ap) if per_ap else 0.0
    return per_ap, mean


def bn_loads(graph: BackhaulGraph) -> dict[str, int]:
    _, root = _bfs_from_backhaul(graph)
    loads = {graph.vertices[b].id: 0 for b in graph.bn_indices}
    for a in graph.ap_indices:
        if root[a] >= 0:
            loads[graph.vertices[root[a]].id] += 1
    return loads


def jain_fairness(loads: Sequence[float]) -> float:
    if len(loads) == 0:
        raise ValueError("jain_fairness needs at least one load")
    sq = math.fsum(x * x for x in loads)
    if sq == 0:
        return 1.0
    return math.fsum(loads) ** 2 / (len(loads) * sq)


def total_backhaul_length(graph: BackhaulGraph) -> float:
    return math.fsum(e.length for e in graph.edges)


def network_metrics(graph: BackhaulGraph) -> NetworkMetrics:
    per_ap, mean_hops = hop_counts(graph)
    loads = bn_loads(graph)
    values = list(loads.values())
    return NetworkMetrics(
        average_hop_count=mean_hops,
        max_hop_count=max(per_ap.values(), default=0),
        per_bn_ap_count=loads,
        mean_bn_load=sum(values) / len(values) if values else 0.0,
        max_bn_load=max(values, default=0),
        fairness=jain_fairness(values) if values else 1.0,
        total_backhaul_length=total_backhaul_length(graph),
    )
