"""Scenario files and the end-to-end planning run.

A scenario is a flat TOML document::

    users = "population.csv"        # relative to the scenario file
    coordinates = "geographic"      # or "planar" (metres, columns x,y)
    bns = [[-1.03, 37.21]]          # [lat, lon] or [x, y]; or bns_file = "towers.csv"
    radius = 750.0
    kappa = 10
    seed = 0
    ntbn_counts = [0, 1, 2, 3, 4]
    alpha = 0.01
    beta = 0.15
    gamma = 4.4e5
    delta = 0.01
    output_dir = "out"

Infection runs in coordinates normalised to the unit square (the frame
is fitted to the APs and terrestrial BNs) so the default dynamics
parameters apply regardless of the size of the region.
"""

from __future__ import annotations

import logging
import math
import statistics
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import io
from .ap_planner import PlanConfig, SearchTrace, plan_aps
from .clustering import APSet, covered_users
from .geometry import GeoPoint, PlanarPoint, UnitFrame, centroid_reference, project_to_plane, unproject
from .infection import InfectionParams, optimal_forest, steps_bound
from .ntbn import SweepRow, ntbn_sweep

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

# optimal_forest enumerates O(n^2) edges; skip the gap report above this
ORACLE_MAX_VERTICES = 3000


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class Scenario:
    users: list
    terrestrial_bns: list
    plan_config: PlanConfig
    infection_params: InfectionParams = field(default_factory=InfectionParams)
    ntbn_counts: list[int] = field(default_factory=lambda: [0])
    output_dir: Path = Path("out")
    coordinates: str = io.PLANAR
    trace_stride: int = 10

    def __post_init__(self):
        kinds = {type(p) for p in list(self.users) + list(self.terrestrial_bns)}
        expected = GeoPoint if self.coordinates == io.GEOGRAPHIC else PlanarPoint
        if kinds - {expected}:
            raise ConfigError(f"mixed coordinate types in scenario; expected only {expected.__name__}")
        if self.trace_stride < 1:
            raise ConfigError("trace_stride must be >= 1")


_PLAN_KEYS = {"radius", "kappa", "seed", "k0", "raster_resolution"}
_INFECTION_KEYS = {"alpha", "beta", "gamma", "delta", "max_steps"}
_OTHER_KEYS = {"users", "users_format", "coordinates", "bns", "bns_file", "ntbn_counts", "output_dir", "trace_stride"}


def _parse_bns(doc: dict, base: Path, mode: str) -> list:
    if "bns_file" in doc:
        return io.ingest_points(base / doc["bns_file"], mode=mode, require_population=False)
    pts = []
    for item in doc.get("bns", []):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigError(f"bns entries must be [a, b] pairs, got {item!r}")
        pts.append(GeoPoint(float(item[0]), float(item[1])) if mode == io.GEOGRAPHIC else PlanarPoint(float(item[0]), float(item[1])))
    return pts


def scenario_from_dict(doc: dict[str, Any], base: Path = Path("."), overrides: dict[str, Any] | None = None) -> Scenario:
    doc = {**doc, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    unknown = set(doc) - _PLAN_KEYS - _INFECTION_KEYS - _OTHER_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario key(s): {', '.join(sorted(unknown))}")
    if "users" not in doc or "radius" not in doc:
        raise ConfigError("scenario needs at least 'users' and 'radius'")
    mode = doc.get("coordinates", io.GEOGRAPHIC)
    if mode not in (io.GEOGRAPHIC, io.PLANAR):
        raise ConfigError(f"coordinates must be 'geographic' or 'planar', got {mode!r}")
    try:
        users = io.ingest_population(base / doc["users"], doc.get("users_format"), mode)
        bns = _parse_bns(doc, base, mode)
        plan = PlanConfig(
            radius=float(doc["radius"]),
            kappa=int(doc.get("kappa", 10)),
            seed=int(doc.get("seed", 0)),
            k0_override=int(doc["k0"]) if "k0" in doc else None,
            raster_resolution=float(doc["raster_resolution"]) if "raster_resolution" in doc else None,
        )
        params = InfectionParams(**{k: doc[k] for k in _INFECTION_KEYS if k in doc})
        counts = [int(m) for m in doc.get("ntbn_counts", [0])]
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if not counts or any(m < 0 for m in counts) or counts != sorted(counts):
        raise ConfigError(f"ntbn_counts must be a non-empty non-decreasing list of counts >= 0, got {counts}")
    out = Path(doc.get("output_dir", "out"))
    return Scenario(
        users=users,
        terrestrial_bns=bns,
        plan_config=plan,
        infection_params=params,
        ntbn_counts=counts,
        output_dir=out if out.is_absolute() else base / out,
        coordinates=mode,
        trace_stride=int(doc.get("trace_stride", 10)),
    )


def load_scenario(path: str | Path, overrides: dict[str, Any] | None = None) -> Scenario:
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(doc, path.parent, overrides)


@dataclass
class Workspace:
    """Scenario points in metres plus the conversions back to output coordinates."""

    users: list[PlanarPoint]
    bns: list[PlanarPoint]
    reference: GeoPoint | None

    @classmethod
    def from_scenario(cls, sc: Scenario) -> "Workspace":
        if sc.coordinates == io.GEOGRAPHIC:
            ref = centroid_reference(sc.users)
            return cls(project_to_plane(sc.users, ref), project_to_plane(sc.terrestrial_bns, ref), ref)
        return cls(list(sc.users), list(sc.terrestrial_bns), None)

    def to_output(self, x: float, y: float) -> tuple[float, float]:
        if self.reference is None:
            return x, y
        g = unproject([PlanarPoint(x, y)], self.reference)[0]
        return g.lon, g.lat

    def frame(self, aps: APSet) -> UnitFrame:
        return UnitFrame.fit(np.vstack([aps.xy(), [(b.x, b.y) for b in self.bns]]))


@dataclass
class Bundle:
    output_dir: Path
    aps: APSet
    trace: SearchTrace
    rows: list[SweepRow]
    records: list[dict]
    files: list[Path] = field(default_factory=list)


def _write(bundle_files: list[Path], path: Path, text: str) -> None:
    io.atomic_write_text(path, text)
    bundle_files.append(path)


def plan_stage(ws: Workspace, sc: Scenario) -> tuple[APSet, SearchTrace]:
    return plan_aps(ws.users, sc.plan_config)


def write_aps(out: Path, ws: Workspace, aps: APSet, trace: SearchTrace, files: list[Path]) -> None:
    ids = [f"AP{i}" for i in range(aps.k)]
    _write(files, out / "aps.geojson", io.dump_json(io.points_geojson(aps.centers, ids, "ap", ws.to_output)))
    _write(files, out / "search_trace.json", trace.to_json() + "\n")


def gap_records(rows: list[SweepRow], aps: APSet, bns: list[PlanarPoint]) -> list[dict]:
    records = []
    for row in rows:
        rec = row.record()
        n_vertices = aps.k + len(bns) + row.m
        if n_vertices <= ORACLE_MAX_VERTICES:
            _, best = optimal_forest(list(aps.centers), list(bns) + list(row.plan.positions))
            rec["optimal_backhaul_length"] = best
            rec["gap_ratio"] = rec["total_backhaul_length"] / best if best > 0 else 1.0
        records.append(rec)
    return records


def render_report(sc: Scenario, ws: Workspace, aps: APSet, trace: SearchTrace, records: list[dict]) -> str:
    cov = covered_users(aps, ws.users)
    p = sc.infection_params
    lines = [
        "# Network plan report",
        "",
        "## Access points",
        "",
        f"- users: {len(ws.users)} points, total population {cov.total_weight:g}",
        f"- coverage radius R: {sc.plan_config.radius:g} m, search half-width kappa: {sc.plan_config.kappa}",
        f"- initial guess k0: {trace.k0}, refined k_hat: {trace.k_hat}",
        f"- searched k in [{trace.evaluated[0][0]}, {trace.evaluated[-1][0]}]; best k* = {trace.k_star}, rho* = {trace.rho_star:.6g}",
        f"- covered population: {cov.covered_weight:g} ({100.0 * cov.covered_weight / cov.total_weight:.2f}%)",
        "",
        "## Backhaul",
        "",
        f"- terrestrial BNs: {len(ws.bns)}",
        f"- dynamics: alpha={p.alpha:g}, beta={p.beta:g}, gamma={p.gamma:g}, delta={p.delta:g} (unit-square coordinates)",
        "",
        "| NTBNs | avg hops | max hops | max APs/BN | mean APs/BN | Jain | length (m) | optimal (m) | gap ratio |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    ratios = []
    for r in records:
        opt = r.get("optimal_backhaul_length")
        gap = r.get("gap_ratio")
        if gap is not None:
            ratios.append(gap)
        lines.append(
            f"| {r['m']} | {r['average_hop_count']:.4f} | {r['max_hop_count']} | {r['max_bn_load']} | "
            f"{r['mean_bn_load']:.4f} | {r['fairness']:.4f} | {r['total_backhaul_length']:.1f} | "
            f"{'n/a' if opt is None else f'{opt:.1f}'} | {'n/a' if gap is None else f'{gap:.4f}'} |"
        )
    lines.append("")
    if ratios:
        lines.append(f"Median gap ratio (infection length / optimal forest length): {statistics.median(ratios):.4f}")
    else:
        lines.append("Optimal-forest comparison skipped: instance too large.")
    return "\n".join(lines) + "\n"


def run_pipeline(sc: Scenario) -> Bundle:
    """Plan APs, sweep NTBN counts, and write the full output bundle."""
    if not sc.terrestrial_bns:
        raise ConfigError("scenario has no terrestrial backhaul nodes; infection needs at least one")
    if not sc.users:
        raise ConfigError("scenario has no users")
    out = Path(sc.output_dir)
    files: list[Path] = []
    ws = Workspace.from_scenario(sc)

    try:
        aps, trace = plan_stage(ws, sc)
        write_aps(out, ws, aps, trace, files)
    except Exception as exc:
        raise StageError("plan-aps", exc) from exc

    frame = ws.frame(aps)
    bound = steps_bound(math.sqrt(2.0), sc.infection_params)
    if bound > sc.infection_params.max_steps:
        log.warning("max_steps=%d may be too small; worst-case capture needs up to %d steps",
                    sc.infection_params.max_steps, bound)
    try:
        rows = ntbn_sweep(aps, ws.bns, sc.ntbn_counts, sc.infection_params, sc.plan_config.seed, frame)
    except Exception as exc:
        raise StageError("gen-backhaul", exc) from exc

    try:
        for row in rows:
            _write(files, out / f"graph_m{row.m}.geojson", io.dump_json(io.graph_geojson(row.graph, ws.to_output)))
            _write(files, out / f"graph_m{row.m}.dot", io.graph_dot(row.graph, f"backhaul_m{row.m}"))
        _write(files, out / "dynamics.csv", io.dynamics_csv(rows[0].trace, sc.trace_stride))
        records = gap_records(rows, aps, ws.bns)
        _write(files, out / "metrics.json", io.dump_json(records))
        _write(files, out / "report.md", render_report(sc, ws, aps, trace, records))
    except Exception as exc:
        raise StageError("analyze", exc) from exc
    return Bundle(out, aps, trace, rows, records, files)


def with_seed(sc: Scenario, seed: int | None) -> Scenario:
    if seed is None:
        return sc
    return replace(sc, plan_config=replace(sc.plan_config, seed=seed))
