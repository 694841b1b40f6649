"""Rural network planning: AP placement by connectivity ratio, backhaul by infection dynamics."""

from .analytics import NetworkMetrics, bn_loads, hop_counts, jain_fairness, network_metrics, total_backhaul_length
from .ap_planner import PlanConfig, SearchTrace, initial_k0, plan_aps, prune_overlaps, search_k_star
from .clustering import APSet, CoverageReport, connectivity_ratio, covered_users, weighted_kmeans
from .geometry import (
    CoveringPackingResult,
    GeoPoint,
    PlanarPoint,
    convex_hull_area,
    greedy_cover_number,
    greedy_packing_number,
    inflated_area,
    project_to_plane,
)
from .infection import (
    BackhaulGraph,
    InfectionParams,
    InfectionState,
    InfectionTimeout,
    optimal_forest,
    run_infection,
    speed_of,
    step,
)
from .ntbn import NtbnPlan, augmented_infection, ntbn_sweep, place_ntbns

__all__ = [
    "APSet", "BackhaulGraph", "CoverageReport", "CoveringPackingResult", "GeoPoint", "InfectionParams",
    "InfectionState", "InfectionTimeout", "NetworkMetrics", "NtbnPlan", "PlanConfig", "PlanarPoint",
    "SearchTrace", "augmented_infection", "bn_loads", "connectivity_ratio", "convex_hull_area",
    "covered_users", "greedy_cover_number", "greedy_packing_number", "hop_counts", "inflated_area",
    "initial_k0", "jain_fairness", "network_metrics", "ntbn_sweep", "optimal_forest", "place_ntbns",
    "plan_aps", "project_to_plane", "prune_overlaps", "run_infection", "search_k_star", "speed_of",
    "step", "total_backhaul_length", "weighted_kmeans",
]
