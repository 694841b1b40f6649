import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netplanner.analytics import (
    CorruptGraphError,
    bn_loads,
    hop_counts,
    jain_fairness,
    network_metrics,
    total_backhaul_length,
)
from netplanner.geometry import UnitFrame
from netplanner.infection import BackhaulGraph, Edge, InfectionParams, Vertex, VertexKind, run_infection

from test_infection import random_instance


def make_graph(kinds, links, lengths=None):
    """``kinds`` like "BBAAA"; ``links`` are (source, target) index pairs."""
    counters = {}
    vertices = []
    for i, ch in enumerate(kinds):
        kind = {"B": VertexKind.BN, "N": VertexKind.NTBN, "A": VertexKind.AP}[ch]
        n = counters.get(kind, 0)
        counters[kind] = n + 1
        vertices.append(Vertex(f"{kind.value.upper()}{n}", kind, float(i), 0.0))
    lengths = lengths or [1.0] * len(links)
    return BackhaulGraph(vertices, [Edge(s, t, ln, ln) for (s, t), ln in zip(links, lengths)])


class TestHopCounts:
    def test_star(self):
        per, mean = hop_counts(make_graph("BAAA", [(0, 1), (0, 2), (0, 3)]))
        assert list(per.values()) == [1, 1, 1] and mean == 1.0

    def test_chain(self):
        per, mean = hop_counts(make_graph("BAA", [(0, 1), (1, 2)]))
        assert per == {"AP0": 1, "AP1": 2} and mean == 1.5

    def test_two_trees(self):
        g = make_graph("BBAAAAA", [(0, 2), (2, 3), (3, 4), (1, 5), (1, 6)])
        assert hop_counts(g)[1] == pytest.approx(1.6)

    def test_disconnected_ap(self):
        with pytest.raises(CorruptGraphError):
            hop_counts(make_graph("BAA", [(0, 1)]))

    def test_no_aps(self):
        assert hop_counts(make_graph("B", []))[1] == 0.0


class TestLoads:
    def test_one_empty_bn(self):
        g = make_graph("BBAAAAA", [(0, 2), (0, 3), (0, 4), (4, 5), (5, 6)])
        assert bn_loads(g) == {"BN0": 5, "BN1": 0}

    def test_balanced(self):
        g = make_graph("BBAAAAAA", [(0, 2), (0, 3), (3, 4), (1, 5), (5, 6), (5, 7)])
        assert bn_loads(g) == {"BN0": 3, "BN1": 3}

    def test_ntbn_takes_two(self):
        g = make_graph("BNAAAAA", [(0, 2), (0, 3), (3, 4), (1, 5), (1, 6)])
        assert bn_loads(g) == {"BN0": 3, "NTBN0": 2}


class TestJain:
    def test_examples(self):
        assert jain_fairness([3, 3]) == 1.0
        assert jain_fairness([5, 0]) == 0.5
        assert jain_fairness([4, 2, 2]) == pytest.approx(64 / 72, abs=1e-12)
        assert round(jain_fairness([4, 2, 2]), 3) == 0.889

    def test_all_zero(self):
        assert jain_fairness([0, 0, 0]) == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            jain_fairness([])

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=20))
    def test_bounds(self, loads):
        j = jain_fairness(loads)
        if any(loads):
            assert 1 / len(loads) - 1e-12 <= j <= 1 + 1e-12
            assert (j == pytest.approx(1.0, abs=1e-12)) == (len(set(loads)) == 1)


class TestLength:
    def test_examples(self):
        assert total_backhaul_length(make_graph("B", [])) == 0
        assert total_backhaul_length(make_graph("BAA", [(0, 1), (1, 2)], [3.0, 4.0])) == 7.0

    def test_rotation_and_permutation_invariant(self):
        aps, bns = random_instance(4, 10)
        xy = np.array([(q.x, q.y) for q in aps + bns])
        g, _ = run_infection(aps, bns, InfectionParams(delta=0.05), frame=UnitFrame.fit(xy))
        total = total_backhaul_length(g)
        c, s = math.cos(0.7), math.sin(0.7)
        rotated = [Vertex(v.id, v.kind, c * v.x - s * v.y, s * v.x + c * v.y) for v in g.vertices]
        edges = []
        for e in reversed(g.edges):
            a, b = rotated[e.source], rotated[e.target]
            ln = math.hypot(a.x - b.x, a.y - b.y)
            edges.append(Edge(e.source, e.target, ln, ln))
        assert total_backhaul_length(BackhaulGraph(rotated, edges)) == pytest.approx(total, rel=1e-12)


@given(st.integers(0, 5000), st.integers(1, 12), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_metrics_against_networkx(seed, n_aps, n_bns):
    aps, bns = random_instance(seed, n_aps, n_bns)
    xy = np.array([(q.x, q.y) for q in aps + bns])
    g, _ = run_infection(aps, bns, InfectionParams(delta=0.05), frame=UnitFrame.fit(xy))
    m = network_metrics(g)
    G = nx.Graph()
    G.add_nodes_from(range(len(g.vertices)))
    G.add_edges_from((e.source, e.target) for e in g.edges)
    hops = []
    loads = {g.vertices[b].id: 0 for b in g.bn_indices}
    for a in g.ap_indices:
        dist = {b: nx.shortest_path_length(G, a, b) for b in g.bn_indices if nx.has_path(G, a, b)}
        assert len(dist) == 1  # each tree holds exactly one BN root
        (b, h), = dist.items()
        hops.append(h)
        loads[g.vertices[b].id] += 1
    assert m.average_hop_count == pytest.approx(sum(hops) / len(hops))
    assert m.average_hop_count >= 1
    assert m.max_hop_count == max(hops)
    assert m.per_bn_ap_count == loads
    assert sum(m.per_bn_ap_count.values()) == n_aps
    assert m.fairness == pytest.approx(jain_fairness(list(loads.values())))
