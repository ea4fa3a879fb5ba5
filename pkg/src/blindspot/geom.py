"""Planar geometry for line-of-sight tests against line and segment obstacles.

Obstacles are identified by their foot point ``(r, phi)``: the projection of
the origin onto the obstacle's supporting line ``x cos(phi) + y sin(phi) = r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

TWO_PI = 2.0 * math.pi
GEO_TOL = 1e-9  # relative to the largest coordinate magnitude in play


def geo_tolerance(*scales: float) -> float:
    return GEO_TOL * max((abs(s) for s in scales), default=0.0)


@dataclass(frozen=True, slots=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True, slots=True)
class FootPoint:
    """Polar coordinates of the foot of the perpendicular from the origin."""

    r: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.phi)):
            raise ValueError("foot point must be finite")
        if self.r < 0:
            raise ValueError(f"foot distance must be >= 0, got {self.r}")
        phi = math.fmod(self.phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:  # fmod of a value just below -2pi can round up
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def normal(self) -> tuple[float, float]:
        return math.cos(self.phi), math.sin(self.phi)

    def cartesian(self) -> Point2:
        c, s = self.normal
        return Point2(self.r * c, self.r * s)


@dataclass(frozen=True, slots=True)
class ObstacleLine:
    foot: FootPoint


@dataclass(frozen=True, slots=True)
class ObstacleSegment:
    """Segment of length ``2 * half_length`` centred on its foot point."""

    foot: FootPoint
    half_length: float

    def __post_init__(self):
        if not self.half_length > 0:
            raise ValueError(f"half_length must be > 0, got {self.half_length}")

    def endpoints(self) -> tuple[Point2, Point2]:
        p, (dx, dy) = line_from_foot(self.foot)
        h = self.half_length
        return Point2(p.x - h * dx, p.y - h * dy), Point2(p.x + h * dx, p.y + h * dy)


Obstacle = Union[ObstacleLine, ObstacleSegment]


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices; no vertices means empty."""

    vertices: tuple[Point2, ...] = ()

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]]) -> "ConvexPolygon":
        return cls(tuple(Point2(float(x), float(y)) for x, y in coords))

    @classmethod
    def square(cls, halfwidth: float) -> "ConvexPolygon":
        w = float(halfwidth)
        return cls.from_coords([(-w, -w), (w, -w), (w, w), (-w, w)])

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) < 3

    def coords(self) -> list[tuple[float, float]]:
        return [(v.x, v.y) for v in self.vertices]

    def contains(self, point: Point2, tol: float = 0.0) -> bool:
        """Point-in-convex-polygon test; boundary points within ``tol`` count as inside."""
        if self.is_empty:
            return False
        pts = self.vertices
        n = len(pts)
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            ex, ey = b.x - a.x, b.y - a.y
            cross = ex * (point.y - a.y) - ey * (point.x - a.x)
            if cross < -tol * math.hypot(ex, ey):
                return False
        return True


def line_from_foot(foot: FootPoint) -> tuple[Point2, tuple[float, float]]:
    """Return the foot's Cartesian point and the unit direction ``(-sin, cos)`` of its line."""
    c, s = foot.normal
    return Point2(foot.r * c, foot.r * s), (-s, c)


def _orientation(a: Point2, b: Point2, c: Point2, tol: float) -> int:
    ex, ey = b.x - a.x, b.y - a.y
    cross = ex * (c.y - a.y) - ey * (c.x - a.x)
    length = math.hypot(ex, ey)
    # signed distance of c from the line through a, b
    dist = cross / length if length > 0 else 0.0
    if dist > tol:
        return 1
    if dist < -tol:
        return -1
    return 0


def _on_segment(a: Point2, b: Point2, p: Point2, tol: float) -> bool:
    return (
        min(a.x, b.x) - tol <= p.x <= max(a.x, b.x) + tol
        and min(a.y, b.y) - tol <= p.y <= max(a.y, b.y) + tol
    )


def segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool:
    """True iff the closed segments ``a1a2`` and ``b1b2`` share a point.

    Touching at an endpoint counts as intersecting.
    """
    tol = geo_tolerance(a1.x, a1.y, a2.x, a2.y, b1.x, b1.y, b2.x, b2.y)
    o1 = _orientation(a1, a2, b1, tol)
    o2 = _orientation(a1, a2, b2, tol)
    o3 = _orientation(b1, b2, a1, tol)
    o4 = _orientation(b1, b2, a2, tol)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(a1, a2, b1, tol):
        return True
    if o2 == 0 and _on_segment(a1, a2, b2, tol):
        return True
    if o3 == 0 and _on_segment(b1, b2, a1, tol):
        return True
    if o4 == 0 and _on_segment(b1, b2, a2, tol):
        return True
    return False


def los_visible(target: Point2, anchor: Point2, obstacles: Iterable[Obstacle]) -> bool:
    """Whether ``anchor`` has line of sight to ``target`` past every obstacle.

    An obstacle touching the sight line blocks it.
    """
    obstacles = list(obstacles)
    scale = [target.x, target.y, anchor.x, anchor.y]
    scale += [ob.foot.r for ob in obstacles]
    tol = geo_tolerance(*scale)
    if math.hypot(anchor.x - target.x, anchor.y - target.y) <= tol:
        raise ValueError("target and anchor coincide")
    for ob in obstacles:
        if isinstance(ob, ObstacleSegment) and math.isfinite(ob.half_length):
            e1, e2 = ob.endpoints()
            if segments_intersect(target, anchor, e1, e2):
                return False
        else:
            c, s = ob.foot.normal
            st = target.x * c + target.y * s - ob.foot.r
            sa = anchor.x * c + anchor.y * s - ob.foot.r
            if abs(st) <= tol or abs(sa) <= tol or (st > 0) != (sa > 0):
                return False
    return True


def crossing_offsets(x, y, r, cos_phi, sin_phi):
    """Where the segment from the origin to ``(x, y)`` crosses each obstacle line.

    Lines are given by foot distance ``r`` and unit normal ``(cos_phi, sin_phi)``.
    Returns the signed position of the crossing along the line, measured from
    the foot point in the direction ``(-sin phi, cos phi)``; NaN where the
    segment does not reach the line. A segment obstacle of half-length ``h``
    blocks exactly when ``|offset| <= h``. All arguments broadcast; padding
    entries with ``r = inf`` never cross.
    """
    proj = x * cos_phi + y * sin_phi
    along = y * cos_phi - x * sin_phi
    crosses = proj >= r
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(crosses, along * (r / proj), np.nan)


def reaches_line(x, y, r, cos_phi, sin_phi):
    """Whether the segment from the origin to ``(x, y)`` meets each line (broadcasting)."""
    return x * cos_phi + y * sin_phi >= r


def visible_from_origin(points, r, phi, half_length: float = math.inf) -> np.ndarray:
    """Vectorised line-of-sight from the origin to each row of ``points``.

    ``r``/``phi`` hold the obstacle feet; ``half_length`` is infinite for lines.
    Foot distances must be strictly positive.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    r = np.asarray(r, dtype=float)[None, :]
    phi = np.asarray(phi, dtype=float)[None, :]
    if r.size == 0:
        return np.ones(len(pts), dtype=bool)
    x, y = pts[:, :1], pts[:, 1:]
    c, s = np.cos(phi), np.sin(phi)
    if math.isinf(half_length):
        return ~reaches_line(x, y, r, c, s).any(axis=1)
    return ~(np.abs(crossing_offsets(x, y, r, c, s)) <= half_length).any(axis=1)


def _clip_coords(coords, c: float, s: float, r: float, tol: float):
    # Sutherland-Hodgman against the single half-plane x*c + y*s <= r
    n = len(coords)
    if n == 0:
        return coords
    vals = [x * c + y * s - r for x, y in coords]
    if max(vals) <= 0.0:
        return coords
    out = []
    for i in range(n):
        x0, y0 = coords[i]
        x1, y1 = coords[(i + 1) % n]
        f0, f1 = vals[i], vals[(i + 1) % n]
        if f0 <= 0.0:
            out.append((x0, y0))
        if (f0 < 0.0 < f1) or (f1 < 0.0 < f0):
            t = f0 / (f0 - f1)
            out.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    deduped = []
    for p in out:
        if not deduped or abs(p[0] - deduped[-1][0]) > tol or abs(p[1] - deduped[-1][1]) > tol:
            deduped.append(p)
    while len(deduped) > 1 and (
        abs(deduped[0][0] - deduped[-1][0]) <= tol and abs(deduped[0][1] - deduped[-1][1]) <= tol
    ):
        deduped.pop()
    return deduped if len(deduped) >= 3 else []


def clip_halfplane(poly: ConvexPolygon, line: ObstacleLine) -> ConvexPolygon:
    """Intersect ``poly`` with the closed half-plane of ``line`` that contains the origin."""
    coords = poly.coords()
    scale = max((max(abs(x), abs(y)) for x, y in coords), default=0.0)
    tol = geo_tolerance(scale, line.foot.r)
    c, s = line.foot.normal
    return ConvexPolygon.from_coords(_clip_coords(coords, c, s, line.foot.r, tol))


def polygon_area(poly: ConvexPolygon) -> float:
    """Shoelace area (absolute value); zero for empty or degenerate polygons."""
    return _shoelace(poly.coords())


def _shoelace(coords) -> float:
    n = len(coords)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x0, y0 = coords[i]
        x1, y1 = coords[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return abs(0.5 * acc)


def cell_from_feet(r, phi, window_halfwidth: float) -> tuple[list[tuple[float, float]], bool]:
    """Array-level core of :func:`cell_containing_origin`.

    Lines are applied in order of increasing foot distance and the loop stops
    once the nearest remaining line lies beyond every vertex, since such a
    line cannot cut the cell.
    """
    w = float(window_halfwidth)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    tol = geo_tolerance(w, r.max(initial=0.0))
    if r.size and r.min() <= tol:
        raise ValueError("an obstacle line passes through the origin")
    order = np.argsort(r, kind="stable")
    rs = r[order].tolist()
    cs = np.cos(phi[order]).tolist()
    ss = np.sin(phi[order]).tolist()
    coords = [(-w, -w), (w, -w), (w, w), (-w, w)]
    reach = math.sqrt(2.0) * w
    for ri, ci, si in zip(rs, cs, ss):
        if ri >= reach:
            break
        coords = _clip_coords(coords, ci, si, ri, tol)
        reach = max(math.hypot(x, y) for x, y in coords)
    edge = w - tol
    truncated = any(abs(x) >= edge or abs(y) >= edge for x, y in coords)
    return coords, truncated


def cell_containing_origin(
    lines: Sequence[ObstacleLine], window_halfwidth: float
) -> tuple[ConvexPolygon, bool]:
    """Cell of the line tessellation that contains the origin, cut to a square window.

    Returns the polygon and a flag that is set when any vertex lies on the
    window boundary, i.e. the true cell may extend beyond the window.
    """
    r = [ln.foot.r for ln in lines]
    phi = [ln.foot.phi for ln in lines]
    coords, truncated = cell_from_feet(r, phi, window_halfwidth)
    return ConvexPolygon.from_coords(coords), truncated
