import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netplanner.clustering import (
    APSet,
    UndefinedRatioError,
    connectivity_ratio,
    covered_users,
    weighted_kmeans,
)
from netplanner.geometry import PlanarPoint

from conftest import pts, random_points


def centers_of(result):
    return sorted((round(c.x, 9), round(c.y, 9)) for c in result.centers)


class TestWeightedKMeans:
    def test_each_point_own_cluster(self):
        res = weighted_kmeans(pts((0, 0), (10, 0)), 2, seed=0)
        assert centers_of(res) == [(0.0, 0.0), (10.0, 0.0)]

    def test_weighted_centroid(self):
        users = [PlanarPoint(0, 0, 3), PlanarPoint(1, 0, 1)]
        (c,) = weighted_kmeans(users, 1, seed=0).centers
        assert (c.x, c.y) == (0.25, 0.0)
        assert c.weight == 4

    def test_square_symmetry(self):
        (c,) = weighted_kmeans(pts((0, 0), (1, 0), (1, 1), (0, 1)), 1, seed=3).centers
        assert (c.x, c.y) == (0.5, 0.5)

    def test_matches_brute_force_weighted_mean(self, rng):
        users = random_points(rng, 40, 100.0, weights=True)
        res = weighted_kmeans(users, 3, seed=1)
        for k, c in enumerate(res.centers):
            members = [u for u, lab in zip(users, res.labels) if lab == k]
            total = sum(u.weight for u in members)
            assert c.x == pytest.approx(sum(u.weight * u.x for u in members) / total, rel=1e-12)
            assert c.y == pytest.approx(sum(u.weight * u.y for u in members) / total, rel=1e-12)
            assert c.weight == pytest.approx(total)

    def test_labels_are_nearest_center(self, rng):
        users = random_points(rng, 60, 50.0, weights=True)
        res = weighted_kmeans(users, 5, seed=9)
        cxy = np.array([(c.x, c.y) for c in res.centers])
        for u, lab in zip(users, res.labels):
            d = np.hypot(cxy[:, 0] - u.x, cxy[:, 1] - u.y)
            assert d[lab] == pytest.approx(d.min())

    def test_deterministic(self, rng):
        users = random_points(rng, 80, 1000.0, weights=True)
        a = weighted_kmeans(users, 6, seed=42)
        b = weighted_kmeans(users, 6, seed=42)
        assert a.centers == b.centers
        assert np.array_equal(a.labels, b.labels)

    def test_k_reduced_to_distinct_positions(self):
        res = weighted_kmeans(pts((0, 0), (0, 0), (5, 5)), 3, seed=0)
        assert res.k == 2 and res.requested_k == 3 and res.k_reduced
        assert centers_of(res) == [(0.0, 0.0), (5.0, 5.0)]

    def test_zero_weight_users_do_not_pull(self):
        users = [PlanarPoint(0, 0, 2), PlanarPoint(2, 0, 2), PlanarPoint(100, 0, 0)]
        res = weighted_kmeans(users, 1, seed=0)
        assert (res.centers[0].x, res.centers[0].y) == (1.0, 0.0)
        assert res.labels[2] == 0

    def test_invalid(self):
        with pytest.raises(ValueError):
            weighted_kmeans(pts((0, 0)), 0, seed=0)
        with pytest.raises(ValueError):
            weighted_kmeans([PlanarPoint(0, 0, 0)], 1, seed=0)

    def test_no_empty_clusters_on_duplicates(self):
        users = pts(*[(0, 0)] * 10, (1, 0), (2, 0), (3, 0))
        res = weighted_kmeans(users, 4, seed=5)
        assert all(c.weight > 0 for c in res.centers)


class TestCoverage:
    def test_distance_check(self):
        aps = APSet((PlanarPoint(0, 0),), 1.0)
        rep = covered_users(aps, [PlanarPoint(0, 0.5, 2), PlanarPoint(0, 2, 7)])
        assert rep.covered_weight == 2 and rep.total_weight == 9
        assert rep.covered_indices == frozenset({0})

    def test_boundary_inclusive(self):
        aps = APSet((PlanarPoint(0, 0),), 5.0)
        rep = covered_users(aps, pts((3, 4), (0, 5), (5, 0)))
        assert rep.covered_weight == 3

    def test_no_users(self):
        rep = covered_users(APSet((PlanarPoint(0, 0),), 1.0), [])
        assert rep.covered_weight == 0 and rep.rho == 0

    def test_apset_invariants(self):
        with pytest.raises(ValueError):
            APSet((), 1.0)
        with pytest.raises(ValueError):
            APSet((PlanarPoint(0, 0),), 0.0)


class TestConnectivityRatio:
    def test_full_coverage_single_ap(self):
        users = [PlanarPoint(x * 0.1, y * 0.1) for x in range(4) for y in range(4)]
        assert connectivity_ratio(APSet((PlanarPoint(0.15, 0.15),), 1.0), users) == 16.0

    def test_no_coverage(self):
        assert connectivity_ratio(APSet((PlanarPoint(100, 100),), 1.0), pts((0, 0), (1, 1))) == 0.0

    def test_two_aps_half_coverage(self):
        users = pts(*[(0, 0)] * 10, *[(50, 0)] * 10)
        aps = APSet((PlanarPoint(0, 0), PlanarPoint(0, 0.5)), 1.0)
        assert connectivity_ratio(aps, users) == 2.5

    def test_zero_total_weight(self):
        with pytest.raises(UndefinedRatioError):
            connectivity_ratio(APSet((PlanarPoint(0, 0),), 1.0), [PlanarPoint(0, 0, 0)])
        with pytest.raises(UndefinedRatioError):
            connectivity_ratio(APSet((PlanarPoint(0, 0),), 1.0), [])


coords = st.tuples(st.floats(0, 100), st.floats(0, 100))


@given(
    st.lists(st.tuples(coords, st.integers(1, 9)), min_size=1, max_size=30),
    st.lists(coords, min_size=1, max_size=5),
    st.lists(coords, max_size=5),
    st.floats(1, 40),
)
@settings(max_examples=100, deadline=None)
def test_coverage_monotone_and_rho_decomposition(users, base, extra, radius):
    users = [PlanarPoint(x, y, float(w)) for (x, y), w in users]
    small = APSet(tuple(PlanarPoint(x, y) for x, y in base), radius)
    big = APSet(tuple(PlanarPoint(x, y) for x, y in base + extra), radius)
    a, b = covered_users(small, users), covered_users(big, users)
    assert a.covered_weight <= b.covered_weight
    assert a.covered_indices <= b.covered_indices
    for aps, rep in ((small, a), (big, b)):
        split = (rep.covered_weight / aps.k) * (rep.covered_weight / rep.total_weight)
        assert math.isclose(rep.rho, split, rel_tol=1e-12, abs_tol=1e-300)
        assert rep.covered_weight <= rep.total_weight


@given(st.integers(1, 20), st.integers(0, 100), st.integers(0, 100), st.integers(1, 100))
def test_ratio_orders_by_coverage_then_ap_count(k, c1, c2, total):
    # equal k favours more coverage, equal coverage favours fewer APs
    c1, c2 = min(c1, total), min(c2, total)
    users = [PlanarPoint(0, 0, float(c1)), PlanarPoint(1000, 0, float(total - c1))]
    other = [PlanarPoint(0, 0, float(c2)), PlanarPoint(1000, 0, float(total - c2))]
    aps = lambda kk: APSet(tuple(PlanarPoint(0, 0.01 * i) for i in range(kk)), 1.0)
    if c1 > c2:
        assert connectivity_ratio(aps(k), users) > connectivity_ratio(aps(k), other)
    if c1 > 0:
        assert connectivity_ratio(aps(k), users) > connectivity_ratio(aps(k + 1), users)
