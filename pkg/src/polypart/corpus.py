"""Seeded generator of simple, non-convex test polygons."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import geometry as geo
from .geometry import Polygon


def _untangle(pts: np.ndarray, max_passes: int = 1000) -> np.ndarray:
    """2-opt: reverse the path between crossing edges until none cross."""
    pts = pts.copy()
    n = len(pts)
    for _ in range(max_passes):
        crossed = False
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                c, d = pts[j], pts[(j + 1) % n]
                if geo._segments_cross(a[None], b[None], c[None], d[None])[0]:
                    pts[i + 1:j + 1] = pts[i + 1:j + 1][::-1].copy()
                    crossed = True
                    break
            if crossed:
                break
        if not crossed:
            return pts
    return pts


def reflex_count(p) -> int:
    c = np.asarray(p.coords if isinstance(p, Polygon) else p, float)
    if geo.signed_area(c) < 0:
        c = c[::-1]
    prev, nxt = np.roll(c, 1, axis=0), np.roll(c, -1, axis=0)
    cross = (c[:, 0] - prev[:, 0]) * (nxt[:, 1] - c[:, 1]) - (c[:, 1] - prev[:, 1]) * (nxt[:, 0] - c[:, 0])
    return int((cross < 0).sum())


def random_polygon(rng: np.random.Generator, n_vertices: int, radius: float = 100.0,
                   radial_noise: float = 0.35, angle_jitter: float = 0.4) -> Polygon | None:
    """Jittered-angle points on a noisy circle; ``None`` if the result is convex or degenerate."""
    k = np.arange(n_vertices)
    ang = (k + rng.uniform(-angle_jitter, angle_jitter, n_vertices)) * 2 * math.pi / n_vertices
    rad = radius * (1.0 + rng.uniform(-radial_noise, radial_noise, n_vertices))
    pts = np.round(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]), 6)
    if not geo.is_simple(pts):
        pts = _untangle(pts)
        if not geo.is_simple(pts):
            return None
    try:
        p = Polygon(pts)
    except geo.GeometryError:
        return None
    if reflex_count(p) == 0:
        return None
    return p


def generate(count: int, vertex_range=(8, 20), seed: int = 0, **kw) -> list[Polygon]:
    if count < 1:
        raise ValueError("count must be at least 1")
    lo, hi = vertex_range
    if lo < 4 or hi < lo:
        raise ValueError("vertex range must satisfy 4 <= min <= max")
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = random_polygon(rng, int(rng.integers(lo, hi + 1)), **kw)
        if p is not None:
            out.append(p)
    return out


def write_corpus(directory, count: int, vertex_range=(8, 20), seed: int = 0) -> list[Path]:
    from .io import write_polygon

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    width = max(3, len(str(count - 1)))
    for i, p in enumerate(generate(count, vertex_range, seed)):
        path = d / f"polygon_{i:0{width}d}.geojson"
        write_polygon(p, path)
        paths.append(path)
    return paths


def read_corpus(directory) -> list[tuple[str, Polygon]]:
    from .io import read_polygon

    return [(p.name, read_polygon(p)) for p in sorted(Path(directory).glob("*.geojson"))]
