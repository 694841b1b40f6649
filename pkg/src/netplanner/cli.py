"""Command line entry point: ``planner <subcommand> --config scenario.toml``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .analytics import network_metrics
from .clustering import APSet
from .geometry import project_to_plane
from .infection import run_infection, optimal_forest
from .ntbn import ntbn_sweep
from .pipeline import (
    ConfigError,
    StageError,
    Workspace,
    gap_records,
    load_scenario,
    run_pipeline,
    write_aps,
    plan_stage,
)

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3

log = logging.getLogger("netplanner")


def _common(p: argparse.ArgumentParser, needs_config: bool = True) -> None:
    if needs_config:
        p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--radius", type=float, help="AP coverage radius in metres")
        p.add_argument("--kappa", type=int, help="half-width of the k search window")
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--ntbn", type=int, nargs="+", dest="ntbn_counts", help="NTBN counts to sweep")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planner", description="Rural access-point and backhaul planner")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("pipeline", help="run every stage and write the full bundle"))
    _common(sub.add_parser("plan-aps", help="choose the number and positions of APs"))
    for name, helptext in (
        ("gen-backhaul", "connect APs to terrestrial BNs by infection dynamics"),
        ("add-ntbn", "sweep non-terrestrial BN counts"),
        ("oracle", "compare the infection forest with the optimal forest"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--aps", help="aps.geojson from plan-aps (otherwise APs are planned first)")
    p = sub.add_parser("analyze", help="metrics of saved graph_m*.geojson files")
    _common(p, needs_config=False)
    p.add_argument("graphs", nargs="+")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("seed", "radius", "kappa", "alpha", "beta", "gamma", "delta", "ntbn_counts")
    out = {k: getattr(args, k) for k in keys}
    if args.out is not None:
        out["output_dir"] = str(Path(args.out).resolve())
    return out


def _load_aps(path: str, ws: Workspace, sc) -> APSet:
    pts = io.ingest_population(path, mode=sc.coordinates)
    if ws.reference is not None:
        pts = project_to_plane(pts, ws.reference)
    return APSet(tuple(pts), sc.plan_config.radius)


def _aps_for(args, ws, sc) -> APSet:
    if getattr(args, "aps", None):
        return _load_aps(args.aps, ws, sc)
    aps, trace = plan_stage(ws, sc)
    write_aps(Path(sc.output_dir), ws, aps, trace, [])
    return aps


def _run(args: argparse.Namespace) -> int:
    if args.command == "analyze":
        report = {}
        for path in args.graphs:
            report[path] = network_metrics(io.read_graph_geojson(path)).to_dict()
        print(json.dumps(report, indent=2))
        return EXIT_OK

    sc = load_scenario(args.config, _overrides(args))
    if args.command in ("pipeline", "gen-backhaul", "add-ntbn", "oracle") and not sc.terrestrial_bns:
        raise ConfigError("scenario has no terrestrial backhaul nodes")
    out = Path(sc.output_dir)

    if args.command == "pipeline":
        bundle = run_pipeline(sc)
        print(f"wrote {len(bundle.files)} files to {out}")
        return EXIT_OK

    ws = Workspace.from_scenario(sc)
    if args.command == "plan-aps":
        aps, trace = plan_stage(ws, sc)
        write_aps(out, ws, aps, trace, [])
        print(f"k* = {trace.k_star}, rho* = {trace.rho_star:.6g}; wrote {out / 'aps.geojson'}")
        return EXIT_OK

    try:
        aps = _aps_for(args, ws, sc)
    except (io.IngestError, ValueError) as exc:
        raise StageError("plan-aps", exc) from exc
    frame = ws.frame(aps)
    params = sc.infection_params

    if args.command == "gen-backhaul":
        try:
            graph, trace = run_infection(list(aps.centers), ws.bns, params, frame=frame)
        except Exception as exc:
            raise StageError("gen-backhaul", exc) from exc
        io.atomic_write_text(out / "graph_m0.geojson", io.dump_json(io.graph_geojson(graph, ws.to_output)))
        io.atomic_write_text(out / "graph_m0.dot", io.graph_dot(graph, "backhaul_m0"))
        io.atomic_write_text(out / "dynamics.csv", io.dynamics_csv(trace, sc.trace_stride))
        print(json.dumps(network_metrics(graph).to_dict(), indent=2))
        return EXIT_OK

    if args.command == "add-ntbn":
        try:
            rows = ntbn_sweep(aps, ws.bns, sc.ntbn_counts, params, sc.plan_config.seed, frame)
        except Exception as exc:
            raise StageError("add-ntbn", exc) from exc
        for row in rows:
            io.atomic_write_text(out / f"graph_m{row.m}.geojson", io.dump_json(io.graph_geojson(row.graph, ws.to_output)))
            io.atomic_write_text(out / f"graph_m{row.m}.dot", io.graph_dot(row.graph, f"backhaul_m{row.m}"))
        records = gap_records(rows, aps, ws.bns)
        io.atomic_write_text(out / "metrics.json", io.dump_json(records))
        print(json.dumps(records, indent=2))
        return EXIT_OK

    # oracle
    try:
        graph, _ = run_infection(list(aps.centers), ws.bns, params, frame=frame)
        edges, best = optimal_forest(list(aps.centers), ws.bns)
    except Exception as exc:
        raise StageError("oracle", exc) from exc
    heuristic = sum(e.length for e in graph.edges)
    result = {
        "infection_length": heuristic,
        "optimal_length": best,
        "gap_ratio": heuristic / best if best > 0 else 1.0,
        "optimal_edges": [[u, v, w] for u, v, w in edges],
    }
    io.atomic_write_text(out / "oracle.json", io.dump_json(result))
    print(json.dumps({k: v for k, v in result.items() if k != "optimal_edges"}, indent=2))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, io.IngestError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
