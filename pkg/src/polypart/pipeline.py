"""End-to-end decomposition: grid, optimisation, repair, polygons, simplification."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry as geo
from .compactness import ScoreReport, score_report
from .geometry import Polygon
from .grid import Grid, WeightRaster, attach_weights, build_grid, compute_cell_size, raster_mass
from .optimize import OptimizerConfig, Trace, run_pipeline
from .partition import PartitionSet, StructuralError, partitions_to_polygons
from .postprocess import fix_disconnected, rebalance_cell_counts
from .simplify import BorderResult, SimplifyConfig, simplify_borders_detailed


def validate_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(list(weights), float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("at least one weight is required")
    if not np.isfinite(w).all() or (w <= 0).any():
        raise ValueError("weights must be finite and positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must satisfy sum(w) = 1 within 1e-9; got sum(w) = {w.sum():.12g}")
    return w


@dataclass(frozen=True)
class PartitionStats:
    partition_id: int
    weight: float
    area: float
    mass: float
    area_error: float
    cell_count: int
    scores: ScoreReport

    def as_record(self) -> dict:
        rec = {
            "partition_id": self.partition_id,
            "weight": self.weight,
            "area": self.area,
            "mass": self.mass,
            "area_error": self.area_error,
            "cell_count": self.cell_count,
        }
        rec.update(self.scores.as_dict())
        return rec


@dataclass
class DecompositionResult:
    polygon: Polygon
    weights: np.ndarray
    tau: float
    grid: Grid
    partition_set: PartitionSet
    cell_polygons: list  # cell outlines before simplification
    polygons: list  # final sub-polygons
    stats: list
    cell_errors: np.ndarray  # relative mass errors of the cell assignment
    borders: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(abs(st.area_error) for st in self.stats)

    @property
    def status(self) -> str:
        return "success" if self.max_error <= self.tau + 1e-12 else "tolerance_unmet"

    @property
    def mean_collective(self) -> float:
        return float(np.mean([st.scores.collective for st in self.stats]))


def _partition_stats(polys, w, masses_total, mass_of, counts) -> list:
    out = []
    for i, q in enumerate(polys):
        target = w[i] * masses_total
        m = mass_of(q)
        out.append(PartitionStats(i, float(w[i]), geo.area(q), m, (m - target) / target, int(counts[i]),
                                  score_report(q)))
    return out


def decompose(p: Polygon, weights: Sequence[float], cfg: OptimizerConfig | None = None,
              raster: WeightRaster | None = None, simplify: bool = True,
              simplify_cfg: SimplifyConfig | None = None) -> DecompositionResult:
    cfg = cfg or OptimizerConfig()
    w = validate_weights(weights)
    timings = {}

    t0 = time.perf_counter()
    A = geo.area(p)
    grid = build_grid(p, compute_cell_size(cfg.tau, w, A), min_cells=len(w))
    if raster is not None:
        grid = attach_weights(grid, raster)
    timings["grid"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    trace = Trace()
    ps = run_pipeline(p, w, cfg, grid=grid, trace=trace)
    timings["optimize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ps = fix_disconnected(ps)
    ps = rebalance_cell_counts(ps, tau=cfg.tau)
    try:
        cell_polys = partitions_to_polygons(ps)
    except StructuralError:
        ps = fix_disconnected(ps)
        cell_polys = partitions_to_polygons(ps)
    timings["rebalance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    borders = []
    polys = cell_polys
    if simplify and ps.n > 1:
        polys, borders = simplify_borders_detailed(p, cell_polys, grid.cell_size, simplify_cfg, raster)
    timings["simplify"] = time.perf_counter() - t0

    if raster is None:
        total, mass_of = A, geo.area
    else:
        total = grid.total_weight
        mass_of = lambda q: raster_mass(q.coords, raster)  # noqa: E731
    stats = _partition_stats(polys, w, total, mass_of, ps.cell_counts())
    return DecompositionResult(
        polygon=p, weights=w, tau=cfg.tau, grid=grid, partition_set=ps, cell_polygons=cell_polys,
        polygons=polys, stats=stats, cell_errors=ps.area_errors(), borders=borders, timings=timings,
        trace=list(trace.records),
    )
