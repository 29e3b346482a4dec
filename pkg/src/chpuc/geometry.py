"""Heat-power feasible operation regions (FOR) of CHP units.

A FOR is a simple polygon in the (P [MW], H [MWth]) plane. Vertices are
stored counter-clockwise regardless of the order they were supplied in.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GEOM_TOL = 1e-7


class NonConvexPolygonError(ValueError):
    pass


def _signed_area(pts: Sequence[tuple[float, float]]) -> float:
    s = 0.0
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    if d1 == 0 and on_seg(q1, q2, p1):
        return True
    if d2 == 0 and on_seg(q1, q2, p2):
        return True
    if d3 == 0 and on_seg(p1, p2, q1):
        return True
    if d4 == 0 and on_seg(p1, p2, q2):
        return True
    return False


@dataclass(frozen=True)
class ForPolygon:
    """Immutable simple polygon, normalised to counter-clockwise order."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = [(float(p), float(h)) for p, h in self.vertices]
        if len(pts) < 3:
            raise ValueError("FOR polygon needs at least 3 vertices")
        n = len(pts)
        for k in range(n):
            if pts[k] == pts[(k + 1) % n]:
                raise ValueError(f"repeated consecutive vertex {pts[k]}")
        area = _signed_area(pts)
        if abs(area) <= 1e-12:
            raise ValueError("FOR polygon has zero area")
        if area < 0:
            pts.reverse()
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                    raise ValueError("FOR polygon is self-intersecting")
        object.__setattr__(self, "vertices", tuple(pts))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "ForPolygon":
        return cls(tuple((float(p), float(h)) for p, h in points))

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def edges(self):
        v = self.vertices
        n = len(v)
        for k in range(n):
            yield v[k], v[(k + 1) % n]

    def is_convex(self) -> bool:
        v = self.vertices
        n = len(v)
        return all(_cross(v[k - 1], v[k], v[(k + 1) % n]) >= -1e-12 for k in range(n))

    @property
    def p_range(self) -> tuple[float, float]:
        ps = [p for p, _ in self.vertices]
        return min(ps), max(ps)


def _dist_to_segment(p, h, a, b) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    t = ((p - ax) * dx + (h - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return float(np.hypot(p - (ax + t * dx), h - (ay + t * dy)))


def _strictly_inside(poly: ForPolygon, p: float, h: float) -> bool:
    inside = False
    for (x0, y0), (x1, y1) in poly.edges():
        if (y0 > h) != (y1 > h):
            x_cross = x0 + (h - y0) * (x1 - x0) / (y1 - y0)
            if p < x_cross:
                inside = not inside
    return inside


def boundary_distance(poly: ForPolygon, p: float, h: float) -> float:
    return min(_dist_to_segment(p, h, a, b) for a, b in poly.edges())


def contains(poly: ForPolygon, p: float, h: float, tol: float = GEOM_TOL) -> bool:
    """True if (p, h) lies inside the polygon or within ``tol`` of its boundary."""
    if boundary_distance(poly, p, h) <= tol:
        return True
    return _strictly_inside(poly, p, h)


def heat_range(poly) -> tuple[float, float]:
    """Min and max H over the vertices; also accepts a bare vertex sequence (e.g. a flat slice)."""
    verts = poly.vertices if isinstance(poly, ForPolygon) else poly
    hs = [float(h) for _, h in verts]
    return min(hs), max(hs)


def power_interval_at_heat(poly: ForPolygon, h: float, tol: float = GEOM_TOL) -> list[tuple[float, float]]:
    """Maximal disjoint P-intervals of the horizontal slice H = h.

    Returns an empty list when ``h`` lies outside the heat range.
    A slice touching a single vertex yields a degenerate ``(p, p)`` interval.
    """
    h_lo, h_hi = heat_range(poly)
    if h < h_lo - tol or h > h_hi + tol:
        return []
    h = min(max(h, h_lo), h_hi)
    xs = []
    for (x0, y0), (x1, y1) in poly.edges():
        if abs(y1 - y0) <= 1e-12:
            if abs(h - y0) <= tol:
                xs.extend((x0, x1))
            continue
        if min(y0, y1) - tol <= h <= max(y0, y1) + tol:
            s = (h - y0) / (y1 - y0)
            s = min(1.0, max(0.0, s))
            xs.append(x0 + s * (x1 - x0))
    if not xs:
        return []
    xs = sorted(set(xs))
    merged: list[list[float]] = []
    for k in range(len(xs) - 1):
        if xs[k + 1] - xs[k] <= 1e-12:
            continue
        mid = 0.5 * (xs[k] + xs[k + 1])
        if _strictly_inside(poly, mid, h) or boundary_distance(poly, mid, h) <= tol:
            if merged and abs(merged[-1][1] - xs[k]) <= 1e-12:
                merged[-1][1] = xs[k + 1]
            else:
                merged.append([xs[k], xs[k + 1]])
    out = [(lo, hi) for lo, hi in merged]
    # slice grazing the boundary at isolated vertices
    for x in xs:
        if not any(lo - 1e-12 <= x <= hi + 1e-12 for lo, hi in out):
            out.append((x, x))
    return sorted(out)


def max_power_at_heat(poly: ForPolygon, h: float) -> float:
    ivs = power_interval_at_heat(poly, h)
    if not ivs:
        raise ValueError(f"heat {h} outside FOR heat range {heat_range(poly)}")
    return max(hi for _, hi in ivs)


def convex_hull_points(points: Iterable[Sequence[float]]) -> list[tuple[float, float]]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set((float(p), float(h)) for p, h in points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for q in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list[tuple[float, float]] = []
    for q in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return lower[:-1] + upper[:-1]


def convexify(poly: ForPolygon) -> tuple[ForPolygon, bool]:
    """Convex hull of the polygon and whether the polygon was already convex."""
    hull_pts = convex_hull_points(poly.vertices)
    was_convex = set(hull_pts) == set(poly.vertices)
    if was_convex:
        return poly, True
    return ForPolygon(tuple(hull_pts)), False


def halfspace_form(poly: ForPolygon) -> list[tuple[float, float, float]]:
    """One inequality ``alpha*P + beta*H <= gamma`` per edge, unit-normalised."""
    if not poly.is_convex():
        raise NonConvexPolygonError("halfspace_form needs a convex polygon; call convexify first")
    out = []
    for (x0, y0), (x1, y1) in poly.edges():
        # outward normal of a CCW edge
        alpha, beta = y1 - y0, -(x1 - x0)
        norm = float(np.hypot(alpha, beta))
        alpha /= norm
        beta /= norm
        out.append((alpha, beta, alpha * x0 + beta * y0))
    return out
