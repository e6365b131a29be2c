"""GeoJSON / WKT polygon input and result serialisation."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import GeometryError, Polygon


class InputError(ValueError):
    """Input that cannot be read or parsed."""


def _ring_coords(p: Polygon) -> list:
    c = p.coords.tolist()
    return [list(map(float, q)) for q in c + c[:1]]


def polygon_geometry(p: Polygon) -> dict:
    return {"type": "Polygon", "coordinates": [_ring_coords(p)]}


def _geometry_from_geojson(obj) -> dict:
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "FeatureCollection":
        feats = obj.get("features") or []
        if not feats:
            raise InputError("feature collection is empty")
        return _geometry_from_geojson(feats[0])
    if kind == "Feature":
        return _geometry_from_geojson(obj.get("geometry"))
    if kind == "Polygon":
        return obj
    if kind == "MultiPolygon" and len(obj.get("coordinates", [])) == 1:
        return {"type": "Polygon", "coordinates": obj["coordinates"][0]}
    raise InputError(f"expected a GeoJSON Polygon, got {kind!r}")


def parse_polygon(text: str, validate: bool = True) -> Polygon:
    """Parse GeoJSON (leading ``{``) or WKT. Interior rings are ignored."""
    text = text.strip()
    if not text:
        raise InputError("empty input")
    if text[0] == "{":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        geom = _geometry_from_geojson(obj)
        try:
            ring = np.asarray(geom["coordinates"][0], dtype=float)[:, :2]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise InputError(f"bad polygon coordinates: {exc}") from None
    else:
        import shapely.wkt
        from shapely.errors import ShapelyError

        try:
            g = shapely.wkt.loads(text)
        except (ShapelyError, ValueError) as exc:
            raise InputError(f"invalid WKT: {exc}") from None
        if g.geom_type == "MultiPolygon" and len(g.geoms) == 1:
            g = g.geoms[0]
        if g.geom_type != "Polygon" or g.is_empty:
            raise InputError(f"expected a WKT POLYGON, got {g.geom_type}")
        ring = np.asarray(g.exterior.coords, dtype=float)[:, :2]
    return Polygon(ring, validate=validate)


def read_polygon(path, validate: bool = True) -> Polygon:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_polygon(text, validate=validate)


def polygon_feature(p: Polygon, properties: dict | None = None) -> dict:
    return {"type": "Feature", "properties": properties or {}, "geometry": polygon_geometry(p)}


def dumps(obj) -> str:
    return json.dumps(obj, indent=None, separators=(",", ":"), sort_keys=False)


def write_polygon(p: Polygon, path) -> None:
    Path(path).write_text(dumps(polygon_feature(p)) + "\n")


def result_collection(result) -> dict:
    """FeatureCollection of the sub-polygons; rendering extras go in a foreign member."""
    feats = []
    for q, st in zip(result.polygons, result.stats):
        props = {
            "partition_id": st.partition_id,
            "weight": st.weight,
            "area": st.area,
            "area_error": st.area_error,
            "scores": st.scores.as_dict(),
        }
        feats.append(polygon_feature(q, props))
    ps = result.partition_set
    g = result.grid
    extras = {
        "input": polygon_geometry(result.polygon),
        "tau": result.tau,
        "cell_size": g.cell_size,
        "grid_origin": list(map(float, g.origin)),
        "grid_shape": [g.rows, g.cols],
        "circles": [[float(x), float(y), float(r)] for (x, y), r in zip(ps.centers.tolist(), ps.radii.tolist())],
        "unsimplified": [polygon_geometry(q)["coordinates"] for q in result.cell_polygons],
    }
    return {"type": "FeatureCollection", "features": feats, "polypart": extras}


def read_result(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read result {path}: {exc}") from None
    if not isinstance(obj, dict) or obj.get("type") != "FeatureCollection" or not isinstance(obj.get("features"), list):
        raise InputError("result file is not a GeoJSON FeatureCollection")
    for f in obj["features"]:
        try:
            _geometry_from_geojson(f)["coordinates"][0]
        except (InputError, KeyError, IndexError, TypeError) as exc:
            raise InputError(f"malformed feature: {exc}") from None
    return obj


__all__ = [
    "GeometryError",
    "InputError",
    "parse_polygon",
    "read_polygon",
    "write_polygon",
    "polygon_feature",
    "polygon_geometry",
    "result_collection",
    "read_result",
    "dumps",
]
