"""Potential-field partition model over a grid.

Each partition is an attractive circle (centre, radius); a cell joins the
partition minimising ``distance / radius``. Areas used during optimisation are
sums of cell masses, and the shape term uses the exact outline of the cell
union (cell-edge perimeter), so no polygon is built inside the loop.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo
from .compactness import CompactnessMetric
from .geometry import Point, Polygon
from .grid import Grid, _chain_rings


class StructuralError(RuntimeError):
    """A partition cannot be turned into a single simple polygon."""


@dataclass(frozen=True)
class Partition:
    id: int
    cells: frozenset
    center: Point
    radius: float
    target_weight: float


@dataclass(frozen=True, eq=False)
class PartitionSet:
    grid: Grid
    weights: np.ndarray  # Ω, sums to 1
    centers: np.ndarray  # (n, 2)
    radii: np.ndarray  # (n,)
    assignment: np.ndarray = field(default=None)  # (m,) partition per cell, -1 if unassigned

    def __post_init__(self):
        if self.assignment is None:
            object.__setattr__(self, "assignment", np.full(len(self.grid), -1, dtype=int))
        w = np.asarray(self.weights, float)
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"partition weights must sum to 1, got {w.sum():.12g}")
        if (w <= 0).any():
            raise ValueError("partition weights must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def partitions(self) -> list[Partition]:
        out = []
        for i in range(self.n):
            cells = frozenset(np.flatnonzero(self.assignment == i).tolist())
            out.append(Partition(i, cells, Point(*map(float, self.centers[i])), float(self.radii[i]),
                                 float(self.weights[i])))
        return out

    def with_params(self, centers=None, radii=None, assignment=None) -> "PartitionSet":
        return replace(
            self,
            centers=self.centers if centers is None else np.asarray(centers, float),
            radii=self.radii if radii is None else np.asarray(radii, float),
            assignment=self.assignment if assignment is None else np.asarray(assignment, int),
        )

    def params(self) -> np.ndarray:
        """Flat ``(x_i, y_i, r_i)`` vector."""
        return np.column_stack([self.centers, self.radii]).ravel()

    def from_params(self, x) -> "PartitionSet":
        x = np.asarray(x, float).reshape(self.n, 3)
        return self.with_params(centers=x[:, :2], radii=x[:, 2])

    def targets(self) -> np.ndarray:
        return self.weights * self.grid.total_weight

    def masses(self) -> np.ndarray:
        return partition_sums(self.assignment, self.grid.weights, self.n)

    def geometric_areas(self) -> np.ndarray:
        return partition_sums(self.assignment, self.grid.areas, self.n)

    def area_errors(self) -> np.ndarray:
        t = self.targets()
        return (self.masses() - t) / t

    def cell_counts(self) -> np.ndarray:
        a = self.assignment
        return np.bincount(a[a >= 0], minlength=self.n)


def partition_sums(assignment: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    ok = assignment >= 0
    return np.bincount(assignment[ok], weights=values[ok], minlength=n)


def cell_scores(grid: Grid, centers, radii) -> np.ndarray:
    """``(n, m)`` matrix of distance-to-radius ratios."""
    c = np.asarray(centers, float)
    d = np.hypot(grid.centers[None, :, 0] - c[:, None, 0], grid.centers[None, :, 1] - c[:, None, 1])
    return d / np.asarray(radii, float)[:, None]


def assign_from(grid: Grid, centers, radii) -> np.ndarray:
    # argmin keeps the lowest partition id on ties
    return np.argmin(cell_scores(grid, centers, radii), axis=0)


def assign_cells(ps: PartitionSet) -> PartitionSet:
    if (np.asarray(ps.radii) <= 0).any():
        raise ValueError("radii must be positive")
    return ps.with_params(assignment=assign_from(ps.grid, ps.centers, ps.radii))


def outline_perimeters(grid: Grid, assignment: np.ndarray, n: int) -> np.ndarray:
    """Perimeter of each partition's cell union, from outer and cross-partition cell edges."""
    per = partition_sums(assignment, grid.outer_lengths, n)
    if len(grid.pairs):
        a = assignment[grid.pairs[:, 0]]
        b = assignment[grid.pairs[:, 1]]
        cut = a != b
        L = grid.pair_lengths[cut]
        per += np.bincount(a[cut], weights=L, minlength=n)
        per += np.bincount(b[cut], weights=L, minlength=n)
    return per


def area_error(part: Partition, ps: PartitionSet) -> float:
    target = part.target_weight * ps.grid.total_weight
    mass = float(ps.grid.weights[list(part.cells)].sum()) if part.cells else 0.0
    return (mass - target) / target


@dataclass(frozen=True)
class ObjectiveValue:
    f: float
    f_area: float
    f_shape: float
    penalty: float
    area_errors: tuple

    @property
    def total(self) -> float:
        return self.f + self.penalty


def shape_scores(grid: Grid, assignment: np.ndarray, n: int, metric=CompactnessMetric.SCHWARTZBERG) -> np.ndarray:
    a = partition_sums(assignment, grid.areas, n)
    per = outline_perimeters(grid, assignment, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        if CompactnessMetric(metric) is CompactnessMetric.SCHWARTZBERG:
            sc = 2.0 * np.sqrt(np.pi * a) / per
        elif CompactnessMetric(metric) is CompactnessMetric.POLSBY_POPPER:
            sc = 4.0 * np.pi * a / (per * per)
        else:
            raise ValueError(f"metric {metric} has no cell-outline proxy")
    return np.where(per > 0, sc, 0.0)


def objective_terms(errors: np.ndarray, shapes: np.ndarray, pi_c: float, tau: float) -> ObjectiveValue:
    f_area = float(np.sqrt(np.mean(errors ** 2)))
    f_shape = float(np.mean(shapes))
    pi_p = max(0.0, float(np.max(np.abs(errors))) - tau)
    return ObjectiveValue(f_area - f_shape, f_area, f_shape, (pi_c * pi_p) ** 2, tuple(map(float, errors)))


def objective(ps: PartitionSet, pi_c: float = 10.0, tau: float = 0.05,
              metric=CompactnessMetric.SCHWARTZBERG) -> ObjectiveValue:
    """Penalised bi-objective of the current assignment."""
    errors = ps.area_errors()
    shapes = shape_scores(ps.grid, ps.assignment, ps.n, metric)
    return objective_terms(errors, shapes, pi_c, tau)


# --- connectivity -----------------------------------------------------------


def components(grid: Grid, cells) -> list[list[int]]:
    """4-connected components of a cell subset, largest first (ties: lowest cell index)."""
    cells = set(int(k) for k in cells)
    seen = set()
    comps = []
    for k in sorted(cells):
        if k in seen:
            continue
        comp = []
        dq = deque([k])
        seen.add(k)
        while dq:
            u = dq.popleft()
            comp.append(u)
            for v in grid.neighbors[u]:
                if v in cells and v not in seen:
                    seen.add(v)
                    dq.append(v)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def is_connected(grid: Grid, cells) -> bool:
    cells = list(cells)
    return len(cells) <= 1 or len(components(grid, cells)) == 1


# --- outline extraction -----------------------------------------------------


def partition_rings(ps: PartitionSet, i: int) -> list[list]:
    a = ps.assignment
    edges = []
    for k in np.flatnonzero(a == i):
        for u, v, other in ps.grid.ring_edges[k]:
            if other < 0 or a[other] != i:
                edges.append((u, v))
    rings = _chain_rings(edges, pick_left=False)
    return [[e[0] for e in r] for r in rings]


def partition_polygon(ps: PartitionSet, i: int) -> Polygon:
    rings = partition_rings(ps, i)
    if not rings:
        raise StructuralError(f"partition {i} has no cells")
    tiny = 1e-12 * max(1.0, ps.grid.cell_size ** 2)
    areas = [geo.signed_area(np.asarray(r)) if len(r) >= 3 else 0.0 for r in rings]
    outer = [r for r, a in zip(rings, areas) if a > tiny]
    holes = [r for r, a in zip(rings, areas) if a < -tiny]
    if len(outer) != 1:
        raise StructuralError(f"partition {i} is disconnected ({len(outer)} outlines)")
    if holes:
        raise StructuralError(f"partition {i} encloses another partition")
    return Polygon(outer[0], validate=False)


def partitions_to_polygons(ps: PartitionSet) -> list[Polygon]:
    """One outline per partition; same-partition cell edges cancel."""
    if (ps.assignment < 0).any():
        raise StructuralError("some cells are unassigned")
    return [partition_polygon(ps, i) for i in range(ps.n)]
