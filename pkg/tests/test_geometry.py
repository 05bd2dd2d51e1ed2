import numpy as np
import pytest

from lire import (
    Box,
    DistanceMetric,
    Halfspace,
    InvalidRegionKeyError,
    box_intersection,
    distance_to_box,
    feasible_point,
    min_l1_to_polytope,
    project_to_box,
    project_to_polytope_l2,
    region_constraints,
)
from lire.geometry import CONSTRAINT_TOL, METRIC_L1, METRIC_L2SQ

from support import random_polytope

import oracles

L2 = DistanceMetric(METRIC_L2SQ)
L1 = DistanceMetric(METRIC_L1)


def unit_box():
    return Box(np.zeros(2), np.ones(2))


def test_project_to_box_outside_right():
    x = project_to_box(np.array([2.0, 0.5]), unit_box())
    np.testing.assert_allclose(x, [1.0, 0.5])
    assert distance_to_box(np.array([2.0, 0.5]), unit_box(), L2) == pytest.approx(1.0)


def test_project_to_box_corner():
    src = np.array([-1.0, 3.0])
    x = project_to_box(src, unit_box())
    np.testing.assert_allclose(x, [0.0, 1.0])
    assert distance_to_box(src, unit_box(), L1) == pytest.approx(3.0)
    assert distance_to_box(src, unit_box(), L2) == pytest.approx(5.0)


def test_project_inside_is_identity():
    src = np.array([0.25, 0.75])
    np.testing.assert_array_equal(project_to_box(src, unit_box()), src)
    assert distance_to_box(src, unit_box(), L2) == 0.0


def test_box_distance_weighted():
    m = DistanceMetric(METRIC_L2SQ, weights=np.array([2.0, 5.0]))
    src = np.array([2.0, -1.0])
    got = distance_to_box(src, unit_box(), m)
    assert got == pytest.approx(2.0 * 1.0 + 5.0 * 1.0)


def test_box_distance_identity_random():
    rng = np.random.default_rng(5)
    for _ in range(500):
        D = int(rng.integers(1, 6))
        lo = rng.uniform(-2, 1, D)
        hi = lo + rng.uniform(0.05, 2, D)
        if rng.random() < 0.3:
            lo[rng.integers(0, D)] = -np.inf
        if rng.random() < 0.3:
            hi[rng.integers(0, D)] = np.inf
        box = Box(lo, hi)
        x = rng.uniform(-4, 4, D)
        w = rng.uniform(0.5, 2.0, D) if rng.random() < 0.5 else None
        for kind in (METRIC_L2SQ, METRIC_L1):
            m = DistanceMetric(kind, w)
            direct = distance_to_box(x, box, m)
            via_proj = m.distance(project_to_box(x, box), x)
            assert direct == pytest.approx(via_proj, rel=1e-12, abs=1e-15)
            loop = oracles.box_distance_loop(np.where(np.isinf(lo), -1e18, lo),
                                             np.where(np.isinf(hi), 1e18, hi), x, kind, w)
            assert direct == pytest.approx(loop, rel=1e-9, abs=1e-12)


def test_box_empty_flag():
    assert Box(np.array([1.0]), np.array([1.0])).is_empty()
    assert Box(np.array([2.0]), np.array([1.0])).is_empty()
    assert not Box(np.array([1.0]), np.array([1.0 + 1e-12])).is_empty()


def test_box_intersection_strict_halfopen():
    # boxes sharing only a face do not overlap: lower bounds are closed but
    # upper bounds are open
    got = box_intersection(
        np.array([0.0, 0.0]), np.array([1.0, 1.0]), np.array([1.0, 0.0]), np.array([2.0, 1.0])
    )
    assert got is None


def test_box_intersection_overlap():
    lo, hi = box_intersection(
        np.array([0.0]), np.array([2.0]), np.array([1.0]), np.array([3.0])
    )
    np.testing.assert_allclose(lo, [1.0])
    np.testing.assert_allclose(hi, [2.0])


def test_box_intersection_point_overlap_is_empty():
    got = box_intersection(np.array([0.0]), np.array([1.0]), np.array([1.0]), np.array([2.0]))
    assert got is None


def test_metric_validation():
    with pytest.raises(ValueError):
        DistanceMetric("l2")
    with pytest.raises(ValueError):
        DistanceMetric(METRIC_L2SQ, weights=np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        DistanceMetric(METRIC_L1, weights=np.array([1.0, np.inf]))


def test_metric_pairwise_matches_scalar():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=3)
    w = rng.uniform(0.5, 2, 3)
    for kind in (METRIC_L2SQ, METRIC_L1):
        for weights in (None, w):
            m = DistanceMetric(kind, weights)
            pair = m.pairwise(X, y)
            for i in range(len(X)):
                assert pair[i] == pytest.approx(m.distance(X[i], y), rel=1e-12)


def test_region_constraints_stump_right(stump_forest):
    geo = region_constraints(stump_forest, (1,))
    assert geo.box is not None
    np.testing.assert_allclose(geo.box.lower, [0.5])
    np.testing.assert_allclose(geo.box.upper, [np.inf])
    assert len(geo.halfspaces) == 1
    hs = geo.halfspaces[0]
    np.testing.assert_allclose(hs.normal, [-1.0])
    assert hs.offset == pytest.approx(-0.5)
    assert not hs.strict


def test_region_constraints_two_stumps(gap_forest):
    # key (right of 1.0, left of 2.0) pins x to [1.0, 2.0)
    geo = region_constraints(gap_forest, (1, 0))
    np.testing.assert_allclose(geo.box.lower, [1.0])
    np.testing.assert_allclose(geo.box.upper, [2.0])
    strict_sides = [h.strict for h in geo.halfspaces]
    assert sorted(strict_sides) == [False, True]


def test_region_constraints_bad_key(stump_forest):
    with pytest.raises(InvalidRegionKeyError):
        region_constraints(stump_forest, (2,))
    with pytest.raises(InvalidRegionKeyError):
        region_constraints(stump_forest, (0, 0))


def test_region_constraints_oblique(oblique_forest):
    geo = region_constraints(oblique_forest, (1, 1))
    assert geo.box is None
    # one oblique (w.x >= 1 kept as -w.x <= -1) and one axis constraint
    assert len(geo.halfspaces) == 2
    pt = feasible_point(geo.halfspaces, 2)
    assert pt is not None
    assert pt @ np.array([1.0, 1.0]) >= 1.0 - 1e-9
    assert pt[0] >= 0.5 - 1e-9


def test_feasible_point_empty_system():
    np.testing.assert_array_equal(feasible_point([], 3), np.zeros(3))


def test_feasible_point_infeasible():
    hs = [
        Halfspace(np.array([1.0]), 0.0),
        Halfspace(np.array([-1.0]), -1.0),
    ]
    assert feasible_point(hs, 1) is None


def test_feasible_point_strict_tightening():
    # x < 0.5 and x >= 0.5 - only the closure overlaps; tightened must fail
    hs = [
        Halfspace(np.array([1.0]), 0.5, strict=True),
        Halfspace(np.array([-1.0]), -0.5),
    ]
    assert feasible_point(hs, 1, tighten=True) is None
    loose = feasible_point(hs, 1, tighten=False)
    assert loose is not None and loose[0] == pytest.approx(0.5, abs=1e-9)


def test_l2_projection_halfspace_closed_form():
    hs = [Halfspace(np.array([-1.0, -1.0]), -1.0)]
    res = project_to_polytope_l2(np.zeros(2), hs)
    assert res.feasible and res.converged
    np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-7)
    assert res.distance == pytest.approx(0.5, abs=1e-7)


def test_l1_projection_halfspace_closed_form():
    hs = [Halfspace(np.array([-1.0, -1.0]), -1.0)]
    x, d = min_l1_to_polytope(np.zeros(2), hs)
    assert d == pytest.approx(1.0, abs=1e-9)
    assert x.sum() == pytest.approx(1.0, abs=1e-9)


def test_l2_projection_source_inside():
    hs = [Halfspace(np.array([1.0, 0.0]), 1.0)]
    src = np.array([0.25, 0.5])
    res = project_to_polytope_l2(src, hs)
    np.testing.assert_allclose(res.x, src, atol=1e-9)
    assert res.distance == pytest.approx(0.0, abs=1e-12)


def test_l2_projection_infeasible_flagged():
    hs = [
        Halfspace(np.array([1.0, 0.0]), 0.0),
        Halfspace(np.array([-1.0, 0.0]), -1.0),
    ]
    res = project_to_polytope_l2(np.zeros(2), hs)
    assert not res.feasible


def test_l1_projection_infeasible_raises():
    from lire import InfeasiblePolytopeError

    hs = [
        Halfspace(np.array([1.0]), 0.0),
        Halfspace(np.array([-1.0]), -1.0),
    ]
    with pytest.raises(InfeasiblePolytopeError):
        min_l1_to_polytope(np.zeros(1), hs)


def _as_halfspaces(G, h):
    return [Halfspace(G[i], float(h[i])) for i in range(len(G))]


def test_l2_projection_random_vs_active_set():
    rng = np.random.default_rng(17)
    for _ in range(40):
        D = int(rng.integers(2, 4))
        m = int(rng.integers(1, 13))
        G, h, _ = random_polytope(rng, D, m)
        xbar = rng.uniform(-2, 2, D)
        w = rng.uniform(0.5, 2, D) if rng.random() < 0.4 else None
        res = project_to_polytope_l2(xbar, _as_halfspaces(G, h), weights=w)
        assert res.feasible
        assert (G @ res.x <= h + CONSTRAINT_TOL).all()
        _, best = oracles.active_set_l2(G, h, xbar, w)
        assert best is not None
        assert res.distance == pytest.approx(best, abs=1e-4)


def test_l1_projection_random_vs_vertex_oracle():
    rng = np.random.default_rng(23)
    for _ in range(40):
        D = int(rng.integers(2, 4))
        m = int(rng.integers(1, 13))
        G, h, _ = random_polytope(rng, D, m)
        xbar = rng.uniform(-2, 2, D)
        w = rng.uniform(0.5, 2, D) if rng.random() < 0.4 else None
        x, d = min_l1_to_polytope(xbar, _as_halfspaces(G, h), weights=w)
        assert (G @ x <= h + CONSTRAINT_TOL).all()
        _, best = oracles.vertex_l1(G, h, xbar, w)
        assert best is not None
        assert d == pytest.approx(best, abs=1e-6)


def test_halfspace_violation():
    hs = Halfspace(np.array([1.0, 0.0]), 0.5)
    assert hs.violation(np.array([2.0, 0.0])) == pytest.approx(1.5)
    assert hs.violation(np.array([0.0, 9.0])) == pytest.approx(-0.5)
