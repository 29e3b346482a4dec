import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chpuc.geometry import (ForPolygon, NonConvexPolygonError, contains, convex_hull_points, convexify,
                            halfspace_form, heat_range, max_power_at_heat, power_interval_at_heat)

RECT = ForPolygon.from_points([(10, 0), (50, 0), (50, 40), (10, 40)])
QUAD = ForPolygon.from_points([(98.8, 0), (247, 0), (215, 180), (81, 104.8)])
# hexagon with one reflex vertex at (40, 25)
HEX = ForPolygon.from_points([(10, 0), (60, 0), (70, 30), (40, 25), (30, 50), (5, 30)])


def test_vertices_are_members():
    for p, h in QUAD.vertices:
        assert contains(QUAD, p, h)


def test_centroid_is_member():
    v = np.array(QUAD.vertices)
    assert contains(QUAD, *v.mean(axis=0))


def test_far_point_is_not_member():
    assert not contains(QUAD, 247 + 1000, 0)


def test_orientation_normalised():
    cw = ForPolygon.from_points(list(reversed(QUAD.vertices)))
    assert cw.area > 0
    assert set(cw.vertices) == set(QUAD.vertices)


def test_invalid_polygons_rejected():
    with pytest.raises(ValueError):
        ForPolygon.from_points([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        ForPolygon.from_points([(0, 0), (1, 0), (1, 0), (0, 1)])
    with pytest.raises(ValueError):   # bow tie
        ForPolygon.from_points([(0, 0), (1, 1), (1, 0), (0, 1)])


def test_heat_range_examples():
    assert heat_range(RECT) == (0, 40)
    assert heat_range(QUAD) == (0, 180)
    assert heat_range([(1, 7), (5, 7), (9, 7)]) == (7, 7)


def test_power_interval_examples():
    assert power_interval_at_heat(RECT, 20) == [(10, 50)]
    lo, hi = power_interval_at_heat(QUAD, 0)[0]
    assert lo == pytest.approx(98.8) and hi == pytest.approx(247)
    assert power_interval_at_heat(QUAD, 181) == []
    assert max_power_at_heat(QUAD, 0) == pytest.approx(247)


def test_non_convex_slice_has_two_intervals():
    ivs = power_interval_at_heat(HEX, 27.0)
    assert len(ivs) == 2


def _brute_hull(points):
    """Vertices v that are not inside the triangle of any three other points."""
    pts = [tuple(p) for p in points]
    keep = []
    for v in pts:
        others = [q for q in pts if q != v]
        inside = False
        for a, b, c in itertools.combinations(others, 3):
            try:
                tri = ForPolygon.from_points([a, b, c])
            except ValueError:
                continue
            if contains(tri, *v, tol=1e-12):
                inside = True
                break
        if not inside:
            keep.append(v)
    return set(keep)


def test_convexify_examples():
    hull, was = convexify(QUAD)
    assert was and set(hull.vertices) == set(QUAD.vertices)
    tri = ForPolygon.from_points([(0, 0), (4, 0), (1, 3)])
    assert convexify(tri)[1]
    hull, was = convexify(HEX)
    assert not was
    assert len(hull.vertices) == 5
    assert set(hull.vertices) == _brute_hull(HEX.vertices)


def test_halfspaces_of_unit_square():
    sq = ForPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    hs = sorted((round(a, 12), round(b, 12), round(g, 12)) for a, b, g in halfspace_form(sq))
    assert hs == sorted([(1.0, 0.0, 1.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 1.0), (0.0, -1.0, 0.0)])


def test_halfspace_needs_convex():
    with pytest.raises(NonConvexPolygonError):
        halfspace_form(HEX)


def test_vertices_satisfy_all_halfspaces():
    for poly in (RECT, QUAD, convexify(HEX)[0]):
        for a, b, g in halfspace_form(poly):
            for p, h in poly.vertices:
                assert a * p + b * h - g <= 1e-9


def _agree(poly, rng, n):
    hs = halfspace_form(poly)
    lo_p, hi_p = poly.p_range
    lo_h, hi_h = heat_range(poly)
    pts = np.column_stack([rng.uniform(lo_p - 20, hi_p + 20, n), rng.uniform(lo_h - 20, hi_h + 20, n)])
    viol = np.max([a * pts[:, 0] + b * pts[:, 1] - g for a, b, g in hs], axis=0)
    for (p, h), v in zip(pts, viol):
        if abs(v) < 1e-9:
            continue            # on the boundary to within the comparison tolerance
        assert (v <= 0) == contains(poly, p, h, tol=1e-9)


def test_halfspace_and_contains_agree_on_random_points():
    rng = np.random.default_rng(0)
    for poly in (RECT, QUAD, convexify(HEX)[0]):
        _agree(poly, rng, 10_000)


def test_convex_slice_is_one_interval():
    lo, hi = heat_range(QUAD)
    for h in np.linspace(lo, hi, 50)[1:-1]:
        assert len(power_interval_at_heat(QUAD, h)) == 1


def test_hull_contains_polygon_points():
    rng = np.random.default_rng(1)
    hull = convexify(HEX)[0]
    for p, h in rng.uniform([0, -5], [75, 55], size=(2000, 2)):
        if contains(HEX, p, h):
            assert contains(hull, p, h)


points = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=12, unique=True)


@settings(max_examples=60, deadline=None)
@given(points)
def test_convexify_idempotent(pts):
    hull_pts = convex_hull_points(pts)
    if len(hull_pts) < 3:
        return
    try:
        poly = ForPolygon.from_points(hull_pts)
    except ValueError:
        return
    hull, was = convexify(poly)
    assert was
    assert set(convexify(hull)[0].vertices) == set(hull.vertices)
