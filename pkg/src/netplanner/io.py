"""Reading population/tower files and writing GeoJSON, DOT, CSV and JSON outputs."""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Sequence

from .geometry import GeoPoint, PlanarPoint
from .infection import BackhaulGraph, DynamicsTrace, Edge, Vertex, VertexKind

log = logging.getLogger(__name__)

GEOGRAPHIC = "geographic"
PLANAR = "planar"


class IngestError(ValueError):
    pass


def _columns(mode: str) -> tuple[str, str]:
    return ("lat", "lon") if mode == GEOGRAPHIC else ("x", "y")


def _make_point(a: float, b: float, w: float, mode: str):
    # GeoPoint takes (lat, lon); planar takes (x, y)
    return GeoPoint(a, b, w) if mode == GEOGRAPHIC else PlanarPoint(a, b, w)


def infer_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".geojson", ".json"):
        return "geojson"
    if suffix in (".csv", ".txt"):
        return "csv"
    raise IngestError(f"cannot infer format of {path}; pass csv or geojson explicitly")


def _read_csv(path: Path, mode: str, require_population: bool) -> list[tuple[float, float, float, int]]:
    c1, c2 = _columns(mode)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip().lower() for h in (reader.fieldnames or [])]
        needed = [c1, c2] + (["population"] if require_population else [])
        missing = [c for c in needed if c not in header]
        if missing:
            raise IngestError(f"{path}: missing column(s) {', '.join(missing)}; header is {header}")
        reader.fieldnames = header
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                a, b = float(row[c1]), float(row[c2])
                pop = row.get("population")
                w = float(pop) if pop not in (None, "") else 1.0
            except (TypeError, ValueError) as exc:
                raise IngestError(f"{path}:{lineno}: malformed row {row!r}") from exc
            rows.append((a, b, w, lineno))
    return rows


def _read_geojson(path: Path, mode: str) -> list[tuple[float, float, float, int]]:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON ({exc})") from exc
    features = doc.get("features") if isinstance(doc, dict) else None
    if features is None:
        raise IngestError(f"{path}: expected a FeatureCollection")
    rows = []
    for idx, feat in enumerate(features):
        geom = (feat or {}).get("geometry") or {}
        if geom.get("type") != "Point":
            raise IngestError(f"{path}: feature {idx} is a {geom.get('type')!r}, expected Point")
        coords = geom.get("coordinates") or []
        if len(coords) < 2:
            raise IngestError(f"{path}: feature {idx} has malformed coordinates {coords!r}")
        props = feat.get("properties") or {}
        w = float(props.get("population", 1.0))
        x, y = float(coords[0]), float(coords[1])
        # GeoJSON stores [lon, lat]
        rows.append((y, x, w, idx) if mode == GEOGRAPHIC else (x, y, w, idx))
    return rows


def ingest_points(
    path: str | Path, fmt: str | None = None, mode: str = GEOGRAPHIC, require_population: bool = True
) -> list:
    """Load weighted points from CSV or GeoJSON.

    CSV needs a header with ``lat,lon,population`` (``x,y,population`` in
    planar mode). GeoJSON must be a FeatureCollection of Points with a
    ``population`` property. Rows with population <= 0 are dropped.
    """
    path = Path(path)
    fmt = fmt or infer_format(path)
    if mode not in (GEOGRAPHIC, PLANAR):
        raise IngestError(f"unknown coordinate mode {mode!r}")
    if fmt == "csv":
        rows = _read_csv(path, mode, require_population)
    elif fmt == "geojson":
        rows = _read_geojson(path, mode)
    else:
        raise IngestError(f"unsupported format {fmt!r}")

    points, dropped = [], 0
    for a, b, w, where in rows:
        if not w > 0:
            dropped += 1
            continue
        try:
            points.append(_make_point(a, b, w, mode))
        except ValueError as exc:
            raise IngestError(f"{path}: record {where}: {exc}") from exc
    if dropped:
        log.warning("%s: dropped %d record(s) with population <= 0", path, dropped)
    if not points:
        raise IngestError(f"{path}: no usable points")
    return points


def ingest_population(path: str | Path, fmt: str | None = None, mode: str = GEOGRAPHIC) -> list:
    return ingest_points(path, fmt, mode, require_population=True)


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


ToLonLat = Callable[[float, float], tuple[float, float]]


def _identity(x: float, y: float) -> tuple[float, float]:
    return x, y


def points_geojson(points: Sequence[PlanarPoint], ids: Sequence[str], kind: str, to_lonlat: ToLonLat | None = None) -> dict:
    conv = to_lonlat or _identity
    feats = []
    for pid, p in zip(ids, points):
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": list(conv(p.x, p.y))},
            "properties": {"id": pid, "kind": kind, "population": p.weight},
        })
    return {"type": "FeatureCollection", "features": feats}


def graph_geojson(graph: BackhaulGraph, to_lonlat: ToLonLat | None = None) -> dict:
    conv = to_lonlat or _identity
    feats = []
    for v in graph.vertices:
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": list(conv(v.x, v.y))},
            "properties": {"id": v.id, "kind": v.kind.value, "x": v.x, "y": v.y},
        })
    for e in graph.edges:
        s, t = graph.vertices[e.source], graph.vertices[e.target]
        feats.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [list(conv(s.x, s.y)), list(conv(t.x, t.y))]},
            "properties": {
                "source": s.id,
                "target": t.id,
                "length_m": e.length,
                "length_normalized": e.length_normalized,
            },
        })
    return {"type": "FeatureCollection", "features": feats}


def read_graph_geojson(path: str | Path) -> BackhaulGraph:
    """Rebuild a :class:`BackhaulGraph` from :func:`graph_geojson` output (metric coordinates)."""
    doc = json.loads(Path(path).read_text())
    vertices: list[Vertex] = []
    index: dict[str, int] = {}
    lines = []
    for idx, feat in enumerate(doc.get("features", [])):
        geom, props = feat.get("geometry", {}), feat.get("properties", {})
        if geom.get("type") == "Point":
            try:
                v = Vertex(props["id"], VertexKind(props["kind"]), float(props["x"]), float(props["y"]))
            except (KeyError, ValueError) as exc:
                raise IngestError(f"{path}: feature {idx} is not a graph vertex") from exc
            index[v.id] = len(vertices)
            vertices.append(v)
        elif geom.get("type") == "LineString":
            lines.append((idx, props))
        else:
            raise IngestError(f"{path}: feature {idx} has unsupported geometry {geom.get('type')!r}")
    edges = []
    for idx, props in lines:
        try:
            edges.append(Edge(index[props["source"]], index[props["target"]], float(props["length_m"]), float(props.get("length_normalized", 0.0))))
        except KeyError as exc:
            raise IngestError(f"{path}: edge feature {idx} references unknown vertex {exc}") from exc
    return BackhaulGraph(vertices, edges)


def graph_dot(graph: BackhaulGraph, name: str = "backhaul") -> str:
    shapes = {VertexKind.AP: "circle", VertexKind.BN: "doublecircle", VertexKind.NTBN: "triangle"}
    out = [f"graph {name} {{"]
    for v in graph.vertices:
        out.append(f'  "{v.id}" [kind={v.kind.value}, shape={shapes[v.kind]}, pos="{v.x!r},{v.y!r}!"];')
    for e in graph.edges:
        s, t = graph.vertices[e.source].id, graph.vertices[e.target].id
        out.append(f'  "{s}" -- "{t}" [length={e.length!r}];')
    out.append("}")
    return "\n".join(out) + "\n"


def dynamics_csv(trace: DynamicsTrace, stride: int = 1) -> str:
    lines = ["step,vertex_id,radius,speed,infected_flag"]
    for j, vid, r, s, flag in trace.rows(stride):
        lines.append(f"{j},{vid},{r!r},{s!r},{flag}")
    return "\n".join(lines) + "\n"
