"""Planar geometry primitives shared by the rest of the package.

Polygons are stored as ``(n, 2)`` float arrays, counter-clockwise, without a
repeated closing vertex. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class GeometryError(ValueError):
    """Raised for invalid geometric input (too few vertices, self-intersection, ...)."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Polyline:
    points: tuple

    def __post_init__(self):
        pts = tuple(Point(float(x), float(y)) for x, y in self.points)
        if len(pts) < 2:
            raise GeometryError("a polyline needs at least 2 points")
        if any(a == b for a, b in zip(pts, pts[1:])):
            raise GeometryError("consecutive polyline points must differ")
        object.__setattr__(self, "points", pts)

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self.points, float)


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def contains(self, pts, eps: float = 1e-9) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        d = np.hypot(pts[:, 0] - self.center.x, pts[:, 1] - self.center.y)
        return d <= self.radius + eps


@dataclass(frozen=True)
class OrientedRect:
    center: Point
    half_extents: tuple[float, float]
    angle: float

    @property
    def area(self) -> float:
        return 4.0 * self.half_extents[0] * self.half_extents[1]

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        u = np.array([c, s]) * self.half_extents[0]
        v = np.array([-s, c]) * self.half_extents[1]
        o = np.array(self.center)
        return np.array([o - u - v, o + u - v, o + u + v, o - u + v])


def _as_coords(vertices) -> np.ndarray:
    if isinstance(vertices, Polygon):
        return vertices.coords
    arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GeometryError(f"expected a sequence of (x, y) pairs, got shape {arr.shape}")
    return arr


def signed_area(coords) -> float:
    """Shoelace signed area; positive for counter-clockwise rings."""
    c = _as_coords(coords)
    if len(c) < 3:
        return 0.0
    x, y = c[:, 0], c[:, 1]
    # shifting by the first vertex keeps cancellation error small for far-off coordinates
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Vectorised closed-segment intersection test for ab vs cd (broadcasting)."""

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    def on_seg(p, q, r):
        return (
            (np.minimum(p[..., 0], q[..., 0]) <= r[..., 0])
            & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0]))
            & (np.minimum(p[..., 1], q[..., 1]) <= r[..., 1])
            & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]))
        )

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    proper = (np.sign(o1) * np.sign(o2) < 0) & (np.sign(o3) * np.sign(o4) < 0)
    touch = (
        ((o1 == 0) & on_seg(a, b, c))
        | ((o2 == 0) & on_seg(a, b, d))
        | ((o3 == 0) & on_seg(c, d, a))
        | ((o4 == 0) & on_seg(c, d, b))
    )
    return proper | touch


def is_simple(coords) -> bool:
    """O(n^2) check that no two non-adjacent edges of the closed ring meet."""
    c = _as_coords(coords)
    n = len(c)
    if n < 3:
        return False
    a = c
    b = np.roll(c, -1, axis=0)
    hit = _segments_cross(a[:, None, :], b[:, None, :], a[None, :, :], b[None, :, :])
    i, j = np.triu_indices(n, k=1)
    adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
    bad = hit[i, j] & ~adjacent
    if bad.any():
        return False
    # adjacent edges may only share their common vertex: reject folds back onto the previous edge
    e = b - a
    nxt = np.roll(e, -1, axis=0)
    cross = e[:, 0] * nxt[:, 1] - e[:, 1] * nxt[:, 0]
    dot = (e * nxt).sum(axis=1)
    return not bool(((cross == 0) & (dot < 0)).any())


class Polygon:
    """Simple polygon without holes, normalised to counter-clockwise order.

    ``validate=False`` skips the quadratic simplicity test; use it only for
    rings produced internally from already validated geometry.
    """

    __slots__ = ("_coords",)

    def __init__(self, vertices, validate: bool = True):
        c = np.array(_as_coords(vertices), dtype=float)
        if not np.isfinite(c).all():
            raise GeometryError("polygon coordinates must be finite")
        if len(c) > 1 and np.array_equal(c[0], c[-1]):
            c = c[:-1]
        if len(c):
            keep = np.any(c != np.roll(c, 1, axis=0), axis=1)
            if not keep.any():
                keep[0] = True
            c = c[keep]
        if len(c) < 3:
            raise GeometryError("a polygon needs at least 3 distinct vertices")
        a = signed_area(c)
        if a == 0.0:
            raise GeometryError("polygon has zero area")
        if validate and not is_simple(c):
            raise GeometryError("polygon is self-intersecting")
        if a < 0:
            c = c[::-1].copy()
        c.setflags(write=False)
        self._coords = c

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def vertices(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in self._coords]

    def __len__(self) -> int:
        return len(self._coords)

    def __repr__(self) -> str:
        return f"Polygon({len(self)} vertices, area={area(self):.6g})"

    def bounds(self) -> tuple[float, float, float, float]:
        c = self._coords
        return float(c[:, 0].min()), float(c[:, 1].min()), float(c[:, 0].max()), float(c[:, 1].max())

    def transformed(self, scale: float = 1.0, angle: float = 0.0, offset=(0.0, 0.0)) -> "Polygon":
        cs, sn = math.cos(angle), math.sin(angle)
        rot = np.array([[cs, -sn], [sn, cs]])
        return Polygon(scale * self._coords @ rot.T + np.asarray(offset, float), validate=False)

    def reversed_ring(self) -> np.ndarray:
        return self._coords[::-1].copy()


def area(p) -> float:
    return abs(signed_area(p))


def perimeter(p) -> float:
    c = _as_coords(p)
    d = np.roll(c, -1, axis=0) - c
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def centroid(p) -> Point:
    c = _as_coords(p)
    x, y = c[:, 0], c[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cr = x * y1 - x1 * y
    a = cr.sum() / 2.0
    if a == 0:
        return Point(float(x.mean()), float(y.mean()))
    return Point(float(((x + x1) * cr).sum() / (6 * a)), float(((y + y1) * cr).sum() / (6 * a)))


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> Polygon:
    t = phase + 2 * math.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])
    return Polygon(pts, validate=False)


def rectangle(width: float, height: float, origin=(0.0, 0.0)) -> Polygon:
    x0, y0 = origin
    return Polygon([(x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height)], validate=False)


# --- clipping -------------------------------------------------------------


def clip_halfplane(ring: list, axis: int, value: float, keep_greater: bool) -> list:
    """One Sutherland-Hodgman pass of ``ring`` against an axis-aligned half-plane."""
    out = []
    n = len(ring)
    if n == 0:
        return out

    def inside(p):
        return p[axis] >= value if keep_greater else p[axis] <= value

    prev = ring[-1]
    prev_in = inside(prev)
    for cur in ring:
        cur_in = inside(cur)
        if cur_in != prev_in:
            t = (value - prev[axis]) / (cur[axis] - prev[axis])
            q = [0.0, 0.0]
            q[axis] = value
            other = 1 - axis
            q[other] = prev[other] + t * (cur[other] - prev[other])
            out.append((q[0], q[1]))
        if cur_in:
            out.append(cur)
        prev, prev_in = cur, cur_in
    return out


def clip_to_box(ring, xmin: float, ymin: float, xmax: float, ymax: float) -> list:
    """Clip a (possibly non-convex) ring against a box; the box is the convex clip window."""
    r = [tuple(p) for p in np.asarray(ring, float)]
    r = clip_halfplane(r, 0, xmin, True)
    r = clip_halfplane(r, 0, xmax, False)
    r = clip_halfplane(r, 1, ymin, True)
    r = clip_halfplane(r, 1, ymax, False)
    return r


def clip_to_cell(p, cell_min, size: float) -> float:
    """Area of ``p`` inside the square ``[cell_min, cell_min + size]``."""
    x0, y0 = float(cell_min[0]), float(cell_min[1])
    r = clip_to_box(_as_coords(p), x0, y0, x0 + size, y0 + size)
    if len(r) < 3:
        return 0.0
    a = abs(signed_area(np.asarray(r)))
    return 0.0 if a < 1e-12 else min(a, size * size)


# --- point queries ---------------------------------------------------------


def points_in_polygon(pts, p) -> np.ndarray:
    """Even-odd test for many points at once."""
    c = _as_coords(p)
    pts = np.asarray(pts, float).reshape(-1, 2)
    x, y = pts[:, 0:1], pts[:, 1:2]
    ax, ay = c[:, 0][None, :], c[:, 1][None, :]
    bx, by = np.roll(c[:, 0], -1)[None, :], np.roll(c[:, 1], -1)[None, :]
    straddle = (ay > y) != (by > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = ax + (y - ay) * (bx - ax) / (by - ay)
    crossing = straddle & (x < xint)
    return (crossing.sum(axis=1) % 2) == 1


def segment_distances(pts, a, b) -> np.ndarray:
    """Distance matrix between points and segments ``a[j]-b[j]``."""
    pts = np.asarray(pts, float).reshape(-1, 2)
    a = np.asarray(a, float).reshape(-1, 2)
    b = np.asarray(b, float).reshape(-1, 2)
    d = b - a
    dd = (d * d).sum(axis=1)
    rel = pts[:, None, :] - a[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, (rel * d[None]).sum(axis=2) / dd, 0.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a[None] + t[..., None] * d[None]
    diff = pts[:, None, :] - proj
    return np.hypot(diff[..., 0], diff[..., 1])


def boundary_distance(pts, p) -> np.ndarray:
    c = _as_coords(p)
    return segment_distances(pts, c, np.roll(c, -1, axis=0)).min(axis=1)


def dist_point_polyline(a, line) -> float:
    pl = np.asarray(line.coords if isinstance(line, Polyline) else line, float).reshape(-1, 2)
    if len(pl) == 1:
        return float(math.hypot(a[0] - pl[0, 0], a[1] - pl[0, 1]))
    return float(segment_distances([a], pl[:-1], pl[1:]).min())


# --- hulls and circles -----------------------------------------------------


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; counter-clockwise hull without collinear points."""
    pts = sorted(set(map(tuple, np.asarray(points, float).reshape(-1, 2).tolist())))
    if len(pts) <= 2:
        return np.array(pts, float)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return np.array(lower[:-1] + upper[:-1], float)


def _circle_two(a, b):
    cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
    return (cx, cy, max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1])))


def _circle_three(a, b, c):
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(x - q[0], y - q[1]) for q in (a, b, c))
    return (x, y, r)


def _in_circle(c, p, eps=1e-12) -> bool:
    return c is not None and math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * (1 + eps) + eps


def min_enclosing_circle(p) -> Circle:
    """Welzl-style incremental smallest enclosing circle of the polygon vertices.

    Runs on the convex hull with a fixed shuffle so results are reproducible.
    """
    hull = convex_hull(_as_coords(p))
    pts = [tuple(q) for q in hull.tolist()]
    random.Random(0x5EC).shuffle(pts)
    circ = None
    for i, q in enumerate(pts):
        if circ is None or not _in_circle(circ, q):
            circ = (q[0], q[1], 0.0)
            for j, r in enumerate(pts[:i]):
                if not _in_circle(circ, r):
                    circ = _circle_two(q, r)
                    for s in pts[:j]:
                        if not _in_circle(circ, s):
                            c3 = _circle_three(q, r, s)
                            if c3 is not None:
                                circ = c3
    assert circ is not None
    return Circle(Point(circ[0], circ[1]), circ[2])


def max_inscribed_circle(p, tol: float | None = None) -> Circle:
    """Pole of inaccessibility by quadtree refinement with a best-first queue.

    The returned radius is within ``tol`` of the largest inscribed radius;
    ``tol`` defaults to 1e-3 of the bounding-box diagonal.
    """
    c = _as_coords(p)
    xmin, ymin = c.min(axis=0)
    xmax, ymax = c.max(axis=0)
    if tol is None:
        tol = 1e-3 * math.hypot(xmax - xmin, ymax - ymin)
    a_pts, b_pts = c, np.roll(c, -1, axis=0)

    def signed_dist(pts):
        pts = np.asarray(pts, float).reshape(-1, 2)
        d = segment_distances(pts, a_pts, b_pts).min(axis=1)
        return np.where(points_in_polygon(pts, c), d, -d)

    size = min(xmax - xmin, ymax - ymin)
    h = size / 2
    if h == 0:
        return Circle(Point(float(xmin), float(ymin)), 0.0)
    xs = np.arange(xmin, xmax, size) + h
    ys = np.arange(ymin, ymax, size) + h
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    dists = signed_dist(centers)
    heap = []
    sqrt2 = math.sqrt(2)
    for (x, y), d in zip(centers, dists):
        heapq.heappush(heap, (-(d + h * sqrt2), float(x), float(y), float(h), float(d)))

    cen = centroid(c)
    best_d = float(signed_dist([cen])[0])
    best = (cen.x, cen.y)
    bx, by = xmin + (xmax - xmin) / 2, ymin + (ymax - ymin) / 2
    d_box = float(signed_dist([(bx, by)])[0])
    if d_box > best_d:
        best_d, best = d_box, (bx, by)

    while heap:
        neg_max, x, y, hh, d = heapq.heappop(heap)
        if d > best_d:
            best_d, best = d, (x, y)
        if -neg_max - best_d <= tol:
            continue
        hh /= 2
        kids = np.array([(x - hh, y - hh), (x + hh, y - hh), (x - hh, y + hh), (x + hh, y + hh)])
        kd = signed_dist(kids)
        for (kx, ky), dk in zip(kids, kd):
            heapq.heappush(heap, (-(dk + hh * sqrt2), float(kx), float(ky), hh, float(dk)))
    return Circle(Point(float(best[0]), float(best[1])), max(best_d, 0.0))


def rotated_min_bounding_rect(p) -> OrientedRect:
    """Minimum-area oriented bounding rectangle via hull-edge enumeration."""
    hull = convex_hull(_as_coords(p))
    edges = np.roll(hull, -1, axis=0) - hull
    angles = np.mod(np.arctan2(edges[:, 1], edges[:, 0]), math.pi / 2)
    angles = np.unique(np.round(angles, 15))
    best = None
    for a in angles:
        cs, sn = math.cos(a), math.sin(a)
        u = hull @ np.array([cs, sn])
        v = hull @ np.array([-sn, cs])
        w, hgt = u.max() - u.min(), v.max() - v.min()
        ar = w * hgt
        # ties resolve to the smallest angle
        if best is None or ar < best[0] * (1 - 1e-12):
            cu, cv = (u.max() + u.min()) / 2, (v.max() + v.min()) / 2
            center = Point(float(cu * cs - cv * sn), float(cu * sn + cv * cs))
            best = (ar, OrientedRect(center, (float(w / 2), float(hgt / 2)), float(a)))
    assert best is not None
    return best[1]


def polyline_length(points) -> float:
    pts = np.asarray(points, float)
    d = np.diff(pts, axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def points_along(points, fractions: Iterable[float]) -> np.ndarray:
    """Points at the given fractions of arc length along an open polyline."""
    pts = np.asarray(points, float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    out = []
    for f in fractions:
        t = f * total
        k = int(np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(seg) - 1))
        lam = 0.0 if seg[k] == 0 else (t - cum[k]) / seg[k]
        out.append(pts[k] + lam * (pts[k + 1] - pts[k]))
    return np.array(out).reshape(-1, 2)


def ring_points_at_arclength(p, distances: Sequence[float]) -> np.ndarray:
    """Points on a closed ring at given arc-length offsets from vertex 0."""
    c = _as_coords(p)
    closed = np.vstack([c, c[:1]])
    total = polyline_length(closed)
    return points_along(closed, [(d % total) / total if total else 0.0 for d in distances])
