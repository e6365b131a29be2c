"""Command-line interface: decompose, gen-corpus, bench, render."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .geometry import GeometryError
from .grid import GridConfigError, RasterError, WeightRaster
from .io import InputError, dumps, read_polygon, read_result, result_collection
from .optimize import Algorithm, ConfigError, OptimizerConfig

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2, 3

STATS_FIELDS = ("partition_id", "weight", "area", "mass", "area_error", "cell_count", "schwartzberg",
                "polsby_popper", "reock", "two_balls", "length_width", "collective")


class UsageError(Exception):
    pass


def parse_weights(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"cannot parse weights {text!r}") from None


def parse_algorithms(text: str) -> tuple:
    try:
        return tuple(Algorithm.parse(a) for a in text.split(",") if a.strip())
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def stats_lines(result) -> list[str]:
    lines = []
    for st in result.stats:
        rec = st.as_record()
        lines.append(json.dumps({k: rec[k] for k in STATS_FIELDS}, separators=(",", ":")))
    return lines


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def cmd_decompose(args) -> int:
    from .pipeline import decompose, validate_weights
    from .render import render_svg

    try:
        polygon = read_polygon(args.input, validate=False)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except GeometryError as exc:
        _err(f"invalid polygon: {exc}")
        return EXIT_INVALID
    from .geometry import Polygon

    try:
        polygon = Polygon(polygon.coords, validate=True)
    except GeometryError as exc:
        _err(f"invalid polygon: {exc}")
        return EXIT_INVALID
    try:
        weights = validate_weights(parse_weights(args.weights))
    except (UsageError, ValueError) as exc:
        _err(f"invalid weights: {exc}")
        return EXIT_INVALID
    raster = None
    if args.raster:
        try:
            raster = WeightRaster.from_ascii(args.raster)
        except (OSError, RasterError) as exc:
            _err(f"cannot read raster: {exc}")
            return EXIT_INPUT
    try:
        cfg = OptimizerConfig(algorithms=parse_algorithms(args.opt), tau=args.tau, seed=args.seed,
                              pi_c=args.pi_c, max_iter_pfh=args.max_iter, budget_evals=args.budget)
        result = decompose(polygon, weights, cfg, raster=raster, simplify=not args.no_simplify)
    except (UsageError, ConfigError, GridConfigError) as exc:
        _err(f"invalid configuration: {exc}")
        return EXIT_INVALID
    except RasterError as exc:
        _err(str(exc))
        return EXIT_INPUT

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    collection = result_collection(result)
    (out / "result.geojson").write_text(dumps(collection) + "\n")
    (out / "stats.jsonl").write_text("\n".join(stats_lines(result)) + "\n")
    run = {
        "input": str(args.input),
        "weights": list(map(float, weights)),
        "tau": args.tau,
        "algorithms": [a.value for a in cfg.algorithms],
        "seed": args.seed,
        "pi_c": args.pi_c,
        "status": result.status,
        "max_area_error": result.max_error,
        "cell_size": result.grid.cell_size,
        "cells": len(result.grid),
        "timings": result.timings,
        "trace": [[s, v] for s, v in result.trace],
    }
    (out / "run.json").write_text(json.dumps(run, indent=1) + "\n")
    if args.svg:
        (out / "result.svg").write_text(render_svg(collection))
    if result.status != "success":
        _err(f"tolerance {args.tau} not met (max |A_err| = {result.max_error:.4g}); results written and flagged")
        return EXIT_TOLERANCE
    print(f"ok: {len(result.polygons)} sub-polygons, max |A_err| = {result.max_error:.4g}, written to {out}")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    from .corpus import write_corpus

    if args.count < 1:
        _err("count must be at least 1")
        return EXIT_INVALID
    paths = write_corpus(args.out, args.count, (args.min_vertices, args.max_vertices), args.seed)
    print(f"wrote {len(paths)} polygons to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import BenchConfig, format_table, run_bench, write_report
    from .corpus import read_corpus

    try:
        polygons = read_corpus(args.corpus)
    except (InputError, GeometryError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    if not polygons:
        _err(f"no polygons found in {args.corpus}")
        return EXIT_INPUT
    if args.limit:
        polygons = polygons[: args.limit]
    try:
        cases = [int(c) for c in args.cases.split(",")]
        opts = args.opt or ["pfh"]
        taus = args.tau or [0.05]
        configs = [BenchConfig(parse_algorithms(o), t, args.seed) for o in opts for t in taus]
    except (ValueError, UsageError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    records = run_bench(polygons, cases, configs, seed=args.seed, workers=args.workers)
    report = write_report(records, args.out)
    print(format_table(report["summary"]))
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import LAYERS, render_svg

    try:
        result = read_result(args.result)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    layers = [l for l in LAYERS if l not in set(args.hide or [])]
    out = Path(args.out) if args.out else Path(args.result).with_suffix(".svg")
    out.write_text(render_svg(result, layers))
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polypart", description="Grid-based potential-field polygon area decomposition.")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="split a polygon into weighted sub-polygons")
    d.add_argument("input", help="GeoJSON or WKT polygon file")
    d.add_argument("--weights", required=True, help="comma-separated, must sum to 1")
    d.add_argument("--tau", type=float, default=0.05, help="relative area tolerance (default 0.05)")
    d.add_argument("--opt", default="pfh", help="algorithms, e.g. pfh or pfh,cmaes (default pfh)")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--pi-c", type=float, default=10.0, help="penalty factor (default 10)")
    d.add_argument("--max-iter", type=int, default=100, help="PFH iteration limit")
    d.add_argument("--budget", type=int, default=3000, help="CMA-ES / random search evaluations")
    d.add_argument("--raster", help="ESRI ASCII density grid for weighted mode")
    d.add_argument("--out", default="out", help="output directory")
    d.add_argument("--svg", action="store_true", help="also write result.svg")
    d.add_argument("--no-simplify", action="store_true", help="keep grid-outline borders")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("gen-corpus", help="write random simple non-convex polygons")
    g.add_argument("--count", type=int, default=200)
    g.add_argument("--min-vertices", type=int, default=8)
    g.add_argument("--max-vertices", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="corpus")
    g.set_defaults(func=cmd_gen_corpus)

    b = sub.add_parser("bench", help="run the weight-case matrix over a corpus")
    b.add_argument("corpus")
    b.add_argument("--cases", default="1,2,3,4,5")
    b.add_argument("--opt", action="append", help="algorithm set; repeat for several")
    b.add_argument("--tau", type=float, action="append", help="tolerance; repeat for several")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--limit", type=int, default=0, help="use only the first N polygons")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", default="bench")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="draw a result file as SVG")
    r.add_argument("result")
    r.add_argument("--out")
    r.add_argument("--hide", action="append", choices=("input", "grid", "partitions", "unsimplified", "borders", "circles"),
                   help="layer to leave out; repeatable")
    r.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
