"""k-point simplification of the grid-outline borders between sub-polygons.

A border runs between two fix points (vertices on the outer boundary or shared
by three or more sub-polygons). It is replaced by the shortest polyline whose
signed area against the original is (near) zero and whose deviation from the
original vertices stays within the threshold.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import LineString, MultiPoint
from shapely.geometry import Polygon as ShapelyPolygon

from . import geometry as geo
from .geometry import Polygon
from .grid import raster_mass


@dataclass(frozen=True)
class SimplifyConfig:
    max_iter_gd: int = 200
    step: float | None = None  # None -> 0.1 * s
    dist_threshold: float | None = None  # None -> s
    area_tol_factor: float = 1e-4  # times the smallest sub-polygon area
    mass_tol_factor: float = 1e-3  # weighted mode: mass moved per border, times the smallest sub-polygon mass

    def __post_init__(self):
        for name in ("max_iter_gd", "step", "dist_threshold", "area_tol_factor", "mass_tol_factor"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Border:
    points: tuple  # A_0 .. A_m, endpoints are fix points
    pair: tuple  # (left polygon index in ring order, other polygon)


@dataclass(frozen=True)
class BorderGraph:
    fix_points: frozenset
    borders: tuple


@dataclass(frozen=True)
class BorderResult:
    border: Border
    points: tuple  # simplified polyline including endpoints
    k: int
    max_dist: float
    residual: float  # |green| of the closure, i.e. twice the area mismatch
    simplified: bool


def green(points) -> float:
    """Wrap-around shoelace sum; twice the signed enclosed area."""
    pts = np.asarray(points, float)
    if len(pts) < 3:
        raise ValueError("green needs at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return float(np.sum(x * yn - xn * y))


def max_dist(original, simplified) -> float:
    """Largest distance from an interior vertex of ``original`` to ``simplified``."""
    orig = np.asarray(original, float)
    if len(orig) <= 2:
        return 0.0
    line = np.asarray(simplified, float)
    pts = orig[1:-1]
    d = np.full(len(pts), np.inf)
    for a, b in zip(line[:-1], line[1:]):
        d = np.minimum(d, geo.segment_distances(pts, a, b))
    return float(d.max())


# --- border extraction -------------------------------------------------------------


def _rings(subpolys) -> list[list[tuple]]:
    return [[(float(x), float(y)) for x, y in np.asarray(q.coords if isinstance(q, Polygon) else q)]
            for q in subpolys]


def _edge_owners(rings) -> dict:
    owners = defaultdict(list)
    for j, ring in enumerate(rings):
        for u, v in zip(ring, ring[1:] + ring[:1]):
            owners[(min(u, v), max(u, v))].append(j)
    return owners


def _fix_points(rings, owners) -> set:
    incident = defaultdict(set)
    fix = set()
    for j, ring in enumerate(rings):
        for u, v in zip(ring, ring[1:] + ring[:1]):
            incident[u].add(j)
            if len(owners[(min(u, v), max(u, v))]) < 2:
                fix.add(u)
                fix.add(v)
    fix.update(u for u, js in incident.items() if len(js) >= 3)
    return fix


def _neighbour(owners, j, u, v) -> int:
    js = owners[(min(u, v), max(u, v))]
    others = [k for k in js if k != j]
    return others[0] if others else -1


def border_graph(subpolys) -> BorderGraph:
    rings = _rings(subpolys)
    owners = _edge_owners(rings)
    fix = _fix_points(rings, owners)
    borders = []
    for j, ring in enumerate(rings):
        m = len(ring)
        starts = [i for i, u in enumerate(ring) if u in fix]
        if not starts:
            continue
        i0 = starts[0]
        run, run_nb = [ring[i0]], None
        for step in range(m):
            u = ring[(i0 + step) % m]
            v = ring[(i0 + step + 1) % m]
            nb = _neighbour(owners, j, u, v)
            if run_nb is not None and nb != run_nb:
                if run_nb > j:
                    borders.append(Border(tuple(run), (j, run_nb)))
                run = [u]
            run_nb = nb
            run.append(v)
            if v in fix:
                if run_nb > j:
                    borders.append(Border(tuple(run), (j, run_nb)))
                run, run_nb = [v], None
    return BorderGraph(frozenset(fix), tuple(borders))


# --- k-point fitting --------------------------------------------------------------


def init_points(border, l: int) -> np.ndarray:
    """``l`` points at equal arc length strictly inside the border."""
    return geo.points_along(np.asarray(border, float), [(j + 1) / (l + 1) for j in range(l)])


def _closure(border: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.vstack([border, b[::-1]])


def _green_grad(border: np.ndarray, b: np.ndarray) -> np.ndarray:
    # in the closure A_0..A_m, B_{l-1}..B_0, B_j sits between B_{j+1} (or A_m) and B_{j-1} (or A_0)
    prev = np.vstack([b[1:], border[-1:]])
    nxt = np.vstack([border[:1], b[:-1]])
    gx = nxt[:, 1] - prev[:, 1]
    gy = prev[:, 0] - nxt[:, 0]
    return np.column_stack([gx, gy])


def fit_points(border, l: int, step: float, max_iter: int, tol: float) -> tuple[np.ndarray, float]:
    """Gradient descent on |green| of the closure; returns (points, |green|)."""
    border = np.asarray(border, float)
    b = init_points(border, l)
    g = green(_closure(border, b))
    for _ in range(max_iter):
        if abs(g) <= tol:
            break
        grad = _green_grad(border, b)
        norm = float(np.linalg.norm(grad))
        if norm == 0.0:
            break
        direction = -math.copysign(1.0, g) * grad / norm
        h = min(step, abs(g) / norm)
        improved = False
        for _ in range(40):
            cand = b + h * direction
            gc = green(_closure(border, cand))
            if abs(gc) < abs(g):
                b, g, improved = cand, gc, True
                break
            h *= 0.5
        if not improved:
            break
    return b, abs(g)


class _Obstacles:
    def __init__(self, p: Polygon, eps: float):
        self.eps = eps
        self.outline = LineString(np.vstack([p.coords, p.coords[:1]]))
        self.region = ShapelyPolygon(p.coords)
        shapely.prepare(self.region)
        self.lines: dict = {}

    def set(self, key, pts):
        self.lines[key] = LineString(pts)

    def admissible(self, key, pts) -> bool:
        line = LineString(pts)
        if not line.is_simple:
            return False
        ends = MultiPoint([pts[0], pts[-1]]).buffer(self.eps)
        if not self.region.covers(line.interpolate(0.5, normalized=True)):
            return False
        if not line.intersection(self.outline).difference(ends).is_empty:
            return False
        for other_key, other in self.lines.items():
            if other_key == key:
                continue
            hit = line.intersection(other)
            if hit.is_empty:
                continue
            if not hit.difference(ends).is_empty:
                return False
        return True


def simplify_border(border: Border, s: float, cfg: SimplifyConfig, tol: float,
                    admissible=lambda pts: True) -> BorderResult:
    pts = np.asarray(border.points, float)
    m = len(pts) - 1
    threshold = cfg.dist_threshold if cfg.dist_threshold is not None else s
    step = cfg.step if cfg.step is not None else 0.1 * s
    for l in range(1, m - 1):
        b, res = fit_points(pts, l, step, cfg.max_iter_gd, tol)
        if res > tol:
            continue
        cand = np.vstack([pts[:1], b, pts[-1:]])
        d = max_dist(pts, cand)
        if d > threshold:
            continue
        out = tuple((float(x), float(y)) for x, y in cand)
        if not admissible(out):
            continue
        return BorderResult(border, out, l + 2, d, res, True)
    return BorderResult(border, border.points, len(border.points), 0.0, 0.0, False)


def _rebuild(rings, results) -> list[list[tuple]]:
    repl = {}
    for r in results:
        if not r.simplified:
            continue
        o, new = r.border.points, r.points
        steps = len(o) - 1
        repl[(o[0], o[1])] = (list(new[1:-1]), steps)
        repl[(o[-1], o[-2])] = (list(new[-2:0:-1]), steps)
    out = []
    for ring in rings:
        m = len(ring)
        starts = [i for i in range(m) if (ring[i], ring[(i + 1) % m]) in repl]
        if not starts:
            out.append(list(ring))
            continue
        # start at the beginning of a replaced border so no border wraps the seam
        i0 = starts[0]
        new_ring, i = [], 0
        while i < m:
            u, v = ring[(i0 + i) % m], ring[(i0 + i + 1) % m]
            new_ring.append(u)
            if (u, v) in repl:
                mids, steps = repl[(u, v)]
                new_ring.extend(mids)
                i += steps
            else:
                i += 1
        out.append(new_ring)
    return out


def simplify_borders_detailed(p: Polygon, subpolys, s: float, cfg: SimplifyConfig | None = None, raster=None):
    """Simplified sub-polygons plus one :class:`BorderResult` per border.

    With a density ``raster`` a candidate must also keep the signed mass between
    the old and new border small, since equal area need not mean equal mass.
    """
    cfg = cfg or SimplifyConfig()
    if s <= 0:
        raise ValueError("cell size must be positive")
    rings = _rings(subpolys)
    graph = border_graph(subpolys)
    a_min = min(geo.area(q) for q in subpolys)
    tol = 2.0 * cfg.area_tol_factor * a_min  # green counts twice the area
    obstacles = _Obstacles(p, 1e-9 * s)
    for idx, bd in enumerate(graph.borders):
        obstacles.set(idx, bd.points)
    if raster is not None:
        mass_tol = cfg.mass_tol_factor * min(raster_mass(q.coords if isinstance(q, Polygon) else q, raster)
                                             for q in subpolys)

    def admissible(idx, bd, pts):
        if raster is not None:
            closure = np.vstack([np.asarray(bd.points, float), np.asarray(pts, float)[-2:0:-1]])
            if abs(raster_mass(closure, raster)) > mass_tol:
                return False
        return obstacles.admissible(idx, pts)

    results = []
    for idx, bd in enumerate(graph.borders):
        r = simplify_border(bd, s, cfg, tol, lambda pts, idx=idx, bd=bd: admissible(idx, bd, pts))
        if r.simplified:
            obstacles.set(idx, r.points)
        results.append(r)
    new_rings = _rebuild(rings, results)
    return [Polygon(r, validate=False) for r in new_rings], results


def simplify_borders(p: Polygon, subpolys, s: float, cfg: SimplifyConfig | None = None, raster=None) -> list[Polygon]:
    return simplify_borders_detailed(p, subpolys, s, cfg, raster)[0]
