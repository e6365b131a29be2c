"""SVG rendering of a decomposition result (GeoJSON FeatureCollection)."""
from __future__ import annotations

import math
from xml.sax.saxutils import quoteattr

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")

LAYERS = ("input", "grid", "partitions", "unsimplified", "borders", "circles")


def color(partition_id: int) -> str:
    return PALETTE[partition_id % len(PALETTE)]


def _path(ring, flip) -> str:
    pts = " L ".join(f"{x:.6g},{flip(y):.6g}" for x, y in ring)
    return f"M {pts} Z"


def render_svg(result: dict, layers=LAYERS, width: int = 800) -> str:
    layers = set(layers)
    extras = result.get("polypart", {})
    rings = [f["geometry"]["coordinates"][0] for f in result["features"]]
    outline = extras.get("input", {}).get("coordinates", [None])[0]
    every = [pt for r in rings for pt in r] + (outline or [])
    if not every:
        every = [(0.0, 0.0), (1.0, 1.0)]
    xs, ys = [p[0] for p in every], [p[1] for p in every]
    xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
    span = max(xmax - xmin, ymax - ymin) or 1.0
    pad = 0.03 * span
    w_, h_ = xmax - xmin + 2 * pad, ymax - ymin + 2 * pad
    height = max(1, int(round(width * h_ / w_)))
    stroke = span / 400

    def flip(y):
        return ymax + ymin - y

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="{xmin - pad:.6g} {ymin - pad:.6g} {w_:.6g} {h_:.6g}">',
    ]
    if "partitions" in layers:
        out.append('<g id="partitions">')
        for f, ring in zip(result["features"], rings):
            pid = int(f.get("properties", {}).get("partition_id", 0))
            out.append(f'<g id="partition-{pid}" class="partition"><path d="{_path(ring, flip)}" '
                       f'fill="{color(pid)}" fill-opacity="0.6" stroke="none"/></g>')
        out.append("</g>")
    if "grid" in layers and "cell_size" in extras:
        s = extras["cell_size"]
        ox, oy = extras["grid_origin"]
        rows, cols = extras["grid_shape"]
        out.append(f'<g id="grid" stroke="#999" stroke-width="{stroke / 2:.6g}" fill="none">')
        for c in range(cols + 1):
            x = ox + c * s
            out.append(f'<line x1="{x:.6g}" y1="{flip(oy):.6g}" x2="{x:.6g}" y2="{flip(oy + rows * s):.6g}"/>')
        for r in range(rows + 1):
            y = flip(oy + r * s)
            out.append(f'<line x1="{ox:.6g}" y1="{y:.6g}" x2="{ox + cols * s:.6g}" y2="{y:.6g}"/>')
        out.append("</g>")
    if "unsimplified" in layers and extras.get("unsimplified"):
        out.append(f'<g id="unsimplified" stroke="#555" stroke-dasharray="{2 * stroke:.6g}" '
                   f'stroke-width="{stroke:.6g}" fill="none">')
        for coords in extras["unsimplified"]:
            out.append(f'<path d="{_path(coords[0], flip)}"/>')
        out.append("</g>")
    if "borders" in layers:
        out.append(f'<g id="borders" stroke="#111" stroke-width="{1.5 * stroke:.6g}" fill="none">')
        for ring in rings:
            out.append(f'<path d="{_path(ring, flip)}"/>')
        out.append("</g>")
    if "input" in layers and outline:
        out.append(f'<g id="input"><path d="{_path(outline, flip)}" fill="none" stroke="#000" '
                   f'stroke-width="{2.5 * stroke:.6g}"/></g>')
    if "circles" in layers and extras.get("circles"):
        out.append(f'<g id="circles" fill="none" stroke-width="{stroke:.6g}">')
        for pid, (x, y, r) in enumerate(extras["circles"]):
            if math.isfinite(r):
                out.append(f'<circle cx="{x:.6g}" cy="{flip(y):.6g}" r="{r:.6g}" stroke={quoteattr(color(pid))}/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
