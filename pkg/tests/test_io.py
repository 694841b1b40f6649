import json
import logging
import os
import stat

import pytest

from netplanner.geometry import GeoPoint, PlanarPoint
from netplanner.infection import InfectionParams, run_infection
from netplanner.io import (
    IngestError,
    atomic_write_text,
    dynamics_csv,
    graph_dot,
    graph_geojson,
    infer_format,
    ingest_points,
    ingest_population,
    points_geojson,
    read_graph_geojson,
)

from conftest import pts


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestCsv:
    def test_three_rows(self, tmp_path):
        p = write(tmp_path, "u.csv", "lat,lon,population\n-1.0,37.0,5\n-1.1,37.1,3\n-1.2,37.2,1\n")
        got = ingest_population(p)
        assert got == [GeoPoint(-1.0, 37.0, 5), GeoPoint(-1.1, 37.1, 3), GeoPoint(-1.2, 37.2, 1)]

    def test_zero_population_dropped(self, tmp_path, caplog):
        p = write(tmp_path, "u.csv", "lat,lon,population\n-1.0,37.0,5\n-1.1,37.1,0\n")
        with caplog.at_level(logging.WARNING):
            got = ingest_population(p)
        assert len(got) == 1
        assert "dropped 1" in caplog.text

    def test_missing_column(self, tmp_path):
        p = write(tmp_path, "u.csv", "lat,population\n1,2\n")
        with pytest.raises(IngestError, match="lon"):
            ingest_population(p)

    def test_malformed_row_line_number(self, tmp_path):
        p = write(tmp_path, "u.csv", "lat,lon,population\n1,2,3\n1,abc,3\n")
        with pytest.raises(IngestError, match=":3:"):
            ingest_population(p)

    def test_out_of_range_latitude(self, tmp_path):
        p = write(tmp_path, "u.csv", "lat,lon,population\n95,2,3\n")
        with pytest.raises(IngestError):
            ingest_population(p)

    def test_empty_result(self, tmp_path):
        p = write(tmp_path, "u.csv", "lat,lon,population\n1,2,0\n")
        with pytest.raises(IngestError, match="no usable"):
            ingest_population(p)

    def test_planar_and_header_case(self, tmp_path):
        p = write(tmp_path, "u.csv", "X,Y,Population\n1.5,2.5,4\n")
        assert ingest_population(p, mode="planar") == [PlanarPoint(1.5, 2.5, 4)]

    def test_population_optional_for_towers(self, tmp_path):
        p = write(tmp_path, "b.csv", "x,y\n1,2\n")
        assert ingest_points(p, mode="planar", require_population=False) == [PlanarPoint(1, 2, 1.0)]


class TestGeojson:
    def test_points(self, tmp_path):
        doc = {"type": "FeatureCollection", "features": [
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [37.0, -1.0]}, "properties": {"population": 7}},
        ]}
        p = write(tmp_path, "u.geojson", json.dumps(doc))
        assert ingest_population(p) == [GeoPoint(-1.0, 37.0, 7)]

    def test_non_point_names_index(self, tmp_path):
        doc = {"type": "FeatureCollection", "features": [
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [37.0, -1.0]}, "properties": {"population": 7}},
            {"type": "Feature", "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 1]]}, "properties": {}},
        ]}
        p = write(tmp_path, "u.geojson", json.dumps(doc))
        with pytest.raises(IngestError, match="feature 1"):
            ingest_population(p)

    def test_not_a_collection(self, tmp_path):
        with pytest.raises(IngestError):
            ingest_population(write(tmp_path, "u.geojson", "[]"))

    def test_points_roundtrip(self, tmp_path):
        points = [PlanarPoint(1.25, -3.5, 2.0), PlanarPoint(1e5 / 3, 7.0, 9.0)]
        p = tmp_path / "aps.geojson"
        p.write_text(json.dumps(points_geojson(points, ["AP0", "AP1"], "ap")))
        assert ingest_population(p, mode="planar") == points


def test_infer_format():
    assert infer_format("a.csv") == "csv" and infer_format("a.GeoJSON") == "geojson"
    with pytest.raises(IngestError):
        infer_format("a.xlsx")


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert stat.S_IMODE(os.stat(target).st_mode) == 0o644
    assert os.listdir(target.parent) == ["f.txt"]


class TestGraphOutputs:
    @pytest.fixture
    def graph_and_trace(self):
        return run_infection(pts((0.3, 0.1), (0.6, 0.2)), pts((0, 0)), InfectionParams(delta=0.05))

    def test_geojson_roundtrip(self, tmp_path, graph_and_trace):
        g, _ = graph_and_trace
        p = tmp_path / "g.geojson"
        p.write_text(json.dumps(graph_geojson(g)))
        assert read_graph_geojson(p) == g

    def test_dot(self, graph_and_trace):
        g, _ = graph_and_trace
        dot = graph_dot(g, "n")
        assert dot.startswith("graph n {") and dot.count(" -- ") == 2
        assert '"BN0" [kind=bn' in dot

    def test_dynamics_csv(self, graph_and_trace):
        _, tr = graph_and_trace
        lines = dynamics_csv(tr, stride=5).splitlines()
        assert lines[0] == "step,vertex_id,radius,speed,infected_flag"
        assert len(lines) - 1 == 3 * len(range(0, tr.final_step + 1, 5))
        step, vid, r, s, flag = lines[1].split(",")
        assert (step, vid, float(r), flag) == ("0", "BN0", 0.0, "1")
