"""Discretisation of a polygon into square grid cells.

A cell is one connected piece of ``square ∩ P``. Cells are built from an exact
arrangement of the polygon boundary with the grid lines, so neighbouring cells
share bit-identical vertices; partition outlines are later assembled from
those shared edges.

Points lying exactly on a grid line belong to the square above / to the right
of it (a line at ``c`` is treated as ``c - ε``).
"""
from __future__ import annotations

import math
import re
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import geometry as geo
from .geometry import Point, Polygon


class GridConfigError(ValueError):
    pass


class RasterError(ValueError):
    pass


def compute_cell_size(tau: float, weights, total_area: float) -> float:
    """Cell side length so that one cell is a ``tau`` fraction of the smallest target area."""
    w = np.asarray(list(weights), dtype=float)
    if not (0 < tau <= 1):
        raise GridConfigError(f"tau must be in (0, 1], got {tau}")
    if w.size == 0 or (w <= 0).any():
        raise GridConfigError("weights must all be positive")
    if total_area <= 0:
        raise GridConfigError("total area must be positive")
    return math.sqrt(tau * float(w.min()) * total_area)


@dataclass(frozen=True)
class GridCell:
    index: int
    row: int
    col: int
    center: Point
    contributing_area: float
    weight: float


@dataclass(frozen=True, eq=False)
class Grid:
    polygon: Polygon
    cell_size: float
    origin: Point
    rows: int
    cols: int
    centers: np.ndarray  # (m, 2) square centres
    areas: np.ndarray  # (m,) contributing area α
    weights: np.ndarray  # (m,) mass used for area accounting
    row_of: np.ndarray
    col_of: np.ndarray
    rings: list  # per cell, CCW list of (x, y) tuples
    ring_edges: list  # per cell, list of (u, v, other_cell_or_-1)
    pairs: np.ndarray  # (p, 2) neighbouring cell indices, i < j
    pair_lengths: np.ndarray  # (p,) shared edge length
    outer_lengths: np.ndarray  # (m,) length of cell boundary on the polygon outline
    neighbors: list = field(repr=False)  # per cell, sorted neighbour indices

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def weighted(self) -> bool:
        return self.weights is not self.areas

    @property
    def cells(self) -> list[GridCell]:
        return [
            GridCell(k, int(self.row_of[k]), int(self.col_of[k]), Point(*map(float, self.centers[k])),
                     float(self.areas[k]), float(self.weights[k]))
            for k in range(len(self))
        ]

    def with_weights(self, weights) -> "Grid":
        w = np.asarray(weights, dtype=float)
        if w.shape != self.areas.shape:
            raise ValueError("weight vector does not match the cell count")
        if (w < 0).any():
            raise ValueError("cell weights must be non-negative")
        if w.sum() <= 0:
            raise ValueError("total cell weight must be positive")
        return replace(self, weights=w)


def _snap(v: float, lines: np.ndarray, tol: float) -> float:
    if len(lines) == 0:
        return v
    k = int(np.searchsorted(lines, v))
    for j in (k - 1, k):
        if 0 <= j < len(lines) and abs(lines[j] - v) <= tol:
            return float(lines[j])
    return v


def _line_crossings(a: float, b: float, lines: np.ndarray) -> np.ndarray:
    """Indices of lines ``L`` with one endpoint ``< L`` and the other ``>= L``."""
    lo, hi = (a, b) if a < b else (b, a)
    if lo == hi:
        return np.empty(0, dtype=int)
    i0 = int(np.searchsorted(lines, lo, side="right"))
    i1 = int(np.searchsorted(lines, hi, side="right"))
    return np.arange(i0, i1)


def _chain_rings(edges: list, pick_left: bool = True) -> list[list]:
    """Link directed edges ``(u, v)`` into closed loops of points."""
    out_edges = defaultdict(list)
    for e in edges:
        out_edges[e[0]].append(e)
    used = set()
    rings = []
    for start in edges:
        if id(start) in used:
            continue
        ring = []
        e = start
        while e is not None and id(e) not in used:
            used.add(id(e))
            ring.append(e)
            u, v = e[0], e[1]
            cands = [c for c in out_edges[v] if id(c) not in used]
            if not cands:
                e = None
            elif len(cands) == 1:
                e = cands[0]
            else:
                din = math.atan2(v[1] - u[1], v[0] - u[0])

                def turn(c, din=din, v=v):
                    dout = math.atan2(c[1][1] - v[1], c[1][0] - v[0])
                    return (dout - din + math.pi) % (2 * math.pi)

                e = max(cands, key=turn) if pick_left else min(cands, key=turn)
        rings.append(ring)
    return rings


def build_grid(p: Polygon, s: float, min_cells: int = 1) -> Grid:
    """Split ``p`` into cells of side ``s`` anchored at its bounding-box minimum corner."""
    if not s > 0:
        raise GridConfigError(f"cell size must be positive, got {s}")
    c = p.coords
    xmin, ymin, xmax, ymax = p.bounds()
    cols = max(1, math.ceil((xmax - xmin) / s - 1e-9))
    rows = max(1, math.ceil((ymax - ymin) / s - 1e-9))
    xl = xmin + s * np.arange(1, cols)
    yl = ymin + s * np.arange(1, rows)
    xl_list, yl_list = xl.tolist(), yl.tolist()
    tol = 1e-9 * s

    def col_of(x):
        return bisect_right(xl_list, x)

    def row_of(y):
        return bisect_right(yl_list, y)

    sq_edges: dict[tuple[int, int], list] = defaultdict(list)
    x_hits: dict[int, list] = defaultdict(list)  # line index -> points on it
    y_hits: dict[int, list] = defaultdict(list)
    boundary_edges = set()

    n = len(c)
    for i in range(n):
        ax, ay = float(c[i, 0]), float(c[i, 1])
        bx, by = float(c[(i + 1) % n, 0]), float(c[(i + 1) % n, 1])
        events = []
        for j in _line_crossings(ax, bx, xl):
            L = xl_list[j]
            t = (L - ax) / (bx - ax)
            pt = (bx, by) if t == 1.0 else (ax, ay) if t == 0.0 else (L, _snap(ay + t * (by - ay), yl, tol))
            events.append((t, pt))
            x_hits[j].append(pt)
        for k in _line_crossings(ay, by, yl):
            L = yl_list[k]
            t = (L - ay) / (by - ay)
            pt = (bx, by) if t == 1.0 else (ax, ay) if t == 0.0 else (_snap(ax + t * (bx - ax), xl, tol), L)
            events.append((t, pt))
            y_hits[k].append(pt)
        events.sort()
        pts = [(ax, ay)] + [e[1] for e in events] + [(bx, by)]
        for u, v in zip(pts[:-1], pts[1:]):
            if u == v:
                continue
            mx, my = (u[0] + v[0]) / 2, (u[1] + v[1]) / 2
            e = (u, v)
            sq_edges[(row_of(my), col_of(mx))].append(e)
            boundary_edges.add(e)

    side_twin: dict[tuple, tuple] = {}

    def add_side(sq_a, e_a, sq_b, e_b):
        sq_edges[sq_a].append(e_a)
        sq_edges[sq_b].append(e_b)
        side_twin[e_a] = e_b
        side_twin[e_b] = e_a

    for j, hits in x_hits.items():
        L = xl_list[j]
        ys = sorted(hits, key=lambda q: q[1])
        if len(ys) % 2:
            raise AssertionError("odd number of crossings on a grid line")
        for a, b in zip(ys[0::2], ys[1::2]):
            inner = [(L, y) for y in yl_list if a[1] < y < b[1]]
            seq = [a] + inner + [b]
            for q0, q1 in zip(seq[:-1], seq[1:]):
                if q0 == q1:
                    continue
                r = row_of((q0[1] + q1[1]) / 2)
                # left square walks its right side upwards, right square walks down
                add_side((r, j), (q0, q1), (r, j + 1), (q1, q0))

    for k, hits in y_hits.items():
        L = yl_list[k]
        xs = sorted(hits, key=lambda q: q[0])
        if len(xs) % 2:
            raise AssertionError("odd number of crossings on a grid line")
        for a, b in zip(xs[0::2], xs[1::2]):
            inner = [(x, L) for x in xl_list if a[0] < x < b[0]]
            seq = [a] + inner + [b]
            for q0, q1 in zip(seq[:-1], seq[1:]):
                if q0 == q1:
                    continue
                cc = col_of((q0[0] + q1[0]) / 2)
                add_side((k, cc), (q1, q0), (k + 1, cc), (q0, q1))

    min_area = 1e-12 * max(1.0, s * s)
    rings, ring_pts, areas, centers, rr, cc_ = [], [], [], [], [], []
    owner: dict[tuple, int] = {}
    for (r, col) in sorted(sq_edges):
        for ring in _chain_rings(sq_edges[(r, col)], pick_left=True):
            pts = [e[0] for e in ring]
            if len(pts) < 3 or ring[-1][1] != ring[0][0]:
                continue
            a = geo.signed_area(np.asarray(pts))
            if a <= min_area:
                continue
            k = len(rings)
            for e in ring:
                owner[e] = k
            rings.append(ring)
            ring_pts.append(pts)
            areas.append(a)
            centers.append((xmin + (col + 0.5) * s, ymin + (r + 0.5) * s))
            rr.append(r)
            cc_.append(col)

    m = len(rings)
    if m < min_cells:
        raise GridConfigError(f"cell size {s:g} yields {m} cells, fewer than the {min_cells} required")

    outer = np.zeros(m)
    pair_len: dict[tuple[int, int], float] = defaultdict(float)
    ring_edges = []
    for k, ring in enumerate(rings):
        lst = []
        for e in ring:
            u, v = e
            length = math.hypot(v[0] - u[0], v[1] - u[1])
            other = -1
            twin = side_twin.get(e)
            if twin is not None:
                other = owner.get(twin, -1)
            if other < 0:
                outer[k] += length
            elif k < other:
                pair_len[(k, other)] += length
            lst.append((u, v, other))
        ring_edges.append(lst)

    pairs = np.array(sorted(pair_len), dtype=int).reshape(-1, 2)
    lengths = np.array([pair_len[tuple(pq)] for pq in pairs.tolist()], dtype=float)
    nbrs = [[] for _ in range(m)]
    for a, b in pairs.tolist():
        nbrs[a].append(b)
        nbrs[b].append(a)
    areas_arr = np.asarray(areas, dtype=float)
    return Grid(
        polygon=p,
        cell_size=float(s),
        origin=Point(xmin, ymin),
        rows=rows,
        cols=cols,
        centers=np.asarray(centers, dtype=float).reshape(-1, 2),
        areas=areas_arr,
        weights=areas_arr,
        row_of=np.asarray(rr, dtype=int),
        col_of=np.asarray(cc_, dtype=int),
        rings=ring_pts,
        ring_edges=ring_edges,
        pairs=pairs,
        pair_lengths=lengths,
        outer_lengths=outer,
        neighbors=[sorted(x) for x in nbrs],
    )


# --- weight rasters ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightRaster:
    """Density raster; ``values[0]`` is the southernmost row. Values are mass per unit area."""

    values: np.ndarray
    xll: float
    yll: float
    cellsize: float

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        return (self.xll, self.yll, self.xll + self.ncols * self.cellsize, self.yll + self.nrows * self.cellsize)

    @classmethod
    def from_ascii(cls, path) -> "WeightRaster":
        text = Path(path).read_text()
        return cls.parse_ascii(text)

    @classmethod
    def parse_ascii(cls, text: str) -> "WeightRaster":
        header = {}
        lines = text.strip().splitlines()
        body_start = 0
        for idx, line in enumerate(lines):
            parts = line.split()
            if parts and re.match(r"^[A-Za-z_]", parts[0]):
                if len(parts) != 2:
                    raise RasterError(f"malformed header line: {line!r}")
                header[parts[0].lower()] = parts[1]
                body_start = idx + 1
            else:
                break
        try:
            ncols, nrows = int(header["ncols"]), int(header["nrows"])
            size = float(header["cellsize"])
            if "xllcorner" in header:
                xll = float(header["xllcorner"])
            else:
                xll = float(header["xllcenter"]) - size / 2
            if "yllcorner" in header:
                yll = float(header["yllcorner"])
            else:
                yll = float(header["yllcenter"]) - size / 2
        except (KeyError, ValueError) as exc:
            raise RasterError(f"bad raster header: {exc}") from None
        try:
            vals = np.array(" ".join(lines[body_start:]).split(), dtype=float)
        except ValueError as exc:
            raise RasterError(f"bad raster value: {exc}") from None
        if vals.size != ncols * nrows:
            raise RasterError(f"expected {ncols * nrows} raster values, found {vals.size}")
        vals = vals.reshape(nrows, ncols)
        if "nodata_value" in header:
            vals[vals == float(header["nodata_value"])] = 0.0
        if size <= 0 or (vals < 0).any() or not np.isfinite(vals).all():
            raise RasterError("raster cell size must be positive and values finite and non-negative")
        return cls(values=vals[::-1].copy(), xll=xll, yll=yll, cellsize=size)

    def to_ascii(self) -> str:
        head = (
            f"ncols {self.ncols}\nnrows {self.nrows}\nxllcorner {self.xll!r}\n"
            f"yllcorner {self.yll!r}\ncellsize {self.cellsize!r}\n"
        )
        body = "\n".join(" ".join(repr(float(v)) for v in row) for row in self.values[::-1])
        return head + body + "\n"


def _area_left_of(ring: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Area of a closed ring restricted to ``x <= t`` for every ``t`` (uses A = -∮ y dx)."""
    x1, y1 = ring[:, 0], ring[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    dx = x2 - x1
    slope = np.divide(y2 - y1, dx, out=np.zeros_like(dx), where=dx != 0)
    t = ts[:, None]
    u1 = np.minimum(x1[None, :], t)
    u2 = np.minimum(x2[None, :], t)
    yu1 = y1 + (u1 - x1) * slope
    yu2 = y1 + (u2 - x1) * slope
    return -((u2 - u1) * (yu1 + yu2) / 2).sum(axis=1)


def _integrate_ring(ring: np.ndarray, raster: WeightRaster) -> float:
    cs = raster.cellsize
    ylo, yhi = ring[:, 1].min(), ring[:, 1].max()
    xlo, xhi = ring[:, 0].min(), ring[:, 0].max()
    r0 = max(0, int(math.floor((ylo - raster.yll) / cs)))
    r1 = min(raster.nrows, int(math.ceil((yhi - raster.yll) / cs)))
    c0 = max(0, int(math.floor((xlo - raster.xll) / cs)))
    c1 = min(raster.ncols, int(math.ceil((xhi - raster.xll) / cs)))
    if r1 <= r0 or c1 <= c0:
        return 0.0
    xe = raster.xll + cs * np.arange(c0, c1 + 1)
    total = 0.0
    pts = [tuple(q) for q in ring.tolist()]
    for r in range(r0, r1):
        y0 = raster.yll + r * cs
        strip = geo.clip_halfplane(pts, 1, y0, True)
        strip = geo.clip_halfplane(strip, 1, y0 + cs, False)
        if len(strip) < 3:
            continue
        f = _area_left_of(np.asarray(strip), xe)
        total += float(np.dot(np.diff(f), raster.values[r, c0:c1]))
    return total


def attach_weights(g: Grid, raster: WeightRaster) -> Grid:
    """Return a copy of ``g`` whose cell weights integrate the raster over each cell."""
    xmin, ymin, xmax, ymax = g.polygon.bounds()
    rx0, ry0, rx1, ry1 = raster.extent
    eps = 1e-9 * max(raster.cellsize, g.cell_size)
    if rx0 > xmin + eps or ry0 > ymin + eps or rx1 < xmax - eps or ry1 < ymax - eps:
        raise RasterError("raster does not cover the polygon bounding box")
    v = raster.values
    if v.size and (v == v.flat[0]).all():
        # constant density integrates exactly to density * area
        w = float(v.flat[0]) * g.areas if float(v.flat[0]) != 1.0 else g.areas.copy()
    else:
        w = np.array([_integrate_ring(np.asarray(ring), raster) for ring in g.rings])
        w = np.maximum(w, 0.0)
    return g.with_weights(w)


def gaussian_raster(bounds, shape=(100, 100), center=None, sigma=None, background=0.0, peak=1.0) -> WeightRaster:
    """Synthetic isotropic Gaussian density over ``bounds`` (xmin, ymin, xmax, ymax); square pixels."""
    xmin, ymin, xmax, ymax = bounds
    nrows, ncols = shape
    size = max((xmax - xmin) / ncols, (ymax - ymin) / nrows)
    cx, cy = center if center is not None else ((xmin + xmax) / 2, (ymin + ymax) / 2)
    sig = sigma if sigma is not None else 0.25 * max(xmax - xmin, ymax - ymin)
    xs = xmin + size * (np.arange(ncols) + 0.5)
    ys = ymin + size * (np.arange(nrows) + 0.5)
    gx, gy = np.meshgrid(xs, ys)
    vals = background + peak * np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / (2 * sig * sig))
    return WeightRaster(values=vals, xll=xmin, yll=ymin, cellsize=size)


def raster_mass(ring, raster: WeightRaster) -> float:
    """Raster mass inside a closed ring."""
    return _integrate_ring(np.asarray(ring, float), raster)
