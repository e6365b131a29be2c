import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polypart import geometry as geo
from polypart.grid import build_grid
from polypart.partition import (
    PartitionSet,
    StructuralError,
    area_error,
    assign_cells,
    components,
    objective,
    objective_terms,
    outline_perimeters,
    partitions_to_polygons,
)

from conftest import l_shape, polygons, unit_square


def make_ps(p, s, centers, radii, weights=None):
    g = build_grid(p, s)
    n = len(radii)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, float)
    return PartitionSet(g, w, np.asarray(centers, float), np.asarray(radii, float))


def brute_force(ps):
    out = []
    for c in ps.grid.centers:
        best, arg = math.inf, -1
        for i, ((x, y), r) in enumerate(zip(ps.centers, ps.radii)):
            v = math.hypot(c[0] - x, c[1] - y) / r
            if v < best:
                best, arg = v, i
        out.append(arg)
    return np.array(out)


def test_single_partition_takes_everything():
    ps = assign_cells(make_ps(unit_square(), 0.25, [(0.3, 0.3)], [1.0]))
    assert (ps.assignment == 0).all()


def test_nearest_center_with_equal_radii():
    p = geo.rectangle(12, 1, (-0.5, -0.5))
    ps = assign_cells(make_ps(p, 1.0, [(0, 0), (10, 0)], [1.0, 1.0]))
    k = next(c.index for c in ps.grid.cells if c.center == pytest.approx((2.0, 0.0)))
    assert ps.assignment[k] == 0


def test_weighted_rule_prefers_large_radius():
    p = geo.rectangle(12, 1, (-0.5, -0.5))
    ps = assign_cells(make_ps(p, 1.0, [(0, 0), (10, 0)], [1.0, 4.0]))
    k = next(c.index for c in ps.grid.cells if c.center == pytest.approx((4.0, 0.0)))
    assert ps.assignment[k] == 1


def test_ties_go_to_lowest_id():
    ps = assign_cells(make_ps(unit_square(), 0.5, [(0.5, 0.5), (0.5, 0.5)], [1.0, 1.0]))
    assert (ps.assignment == 0).all()


@settings(max_examples=50, deadline=None)
@given(polygons(), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_assignment_matches_brute_force_and_is_scale_free(p, n, seed):
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = p.bounds()
    s = max(xmax - xmin, ymax - ymin) / 8
    centers = rng.uniform((xmin, ymin), (xmax, ymax), (n, 2))
    radii = rng.uniform(0.1, 2.0, n) * s
    ps = assign_cells(make_ps(p, s, centers, radii))
    assert (ps.assignment == brute_force(ps)).all()
    scaled = assign_cells(ps.with_params(radii=radii * 3.7))
    assert (scaled.assignment == ps.assignment).all()
    # coverage and disjointness
    cells = [set(part.cells) for part in ps.partitions]
    assert sum(len(c) for c in cells) == len(ps.grid)
    assert set().union(*cells) == set(range(len(ps.grid)))


def test_area_error_examples():
    ps = assign_cells(make_ps(unit_square(), 0.25, [(0.25, 0.5), (0.75, 0.5)], [1.0, 1.0]))
    parts = ps.partitions
    assert area_error(parts[0], ps) == pytest.approx(0.0)
    empty = assign_cells(make_ps(unit_square(), 0.25, [(0.25, 0.5), (5, 5)], [1.0, 0.01]))
    assert area_error(empty.partitions[1], empty) == pytest.approx(-1.0)
    g = build_grid(unit_square(), 0.05)
    a = (g.centers[:, 0] > 0.55).astype(int)  # partition 0 gets 11 of 20 columns
    ps2 = PartitionSet(g, np.array([0.5, 0.5]), np.zeros((2, 2)), np.ones(2), a)
    assert area_error(ps2.partitions[0], ps2) == pytest.approx(0.1)


def test_objective_examples():
    v = objective_terms(np.zeros(3), np.ones(3), 10.0, 0.05)
    assert v.f == pytest.approx(-1.0) and v.penalty == 0.0
    v = objective_terms(np.zeros(2), np.full(2, 0.7), 10.0, 0.05)
    assert v.f == pytest.approx(-0.7)
    v = objective_terms(np.array([0.15, -0.02]), np.ones(2), 10.0, 0.05)
    assert v.penalty == pytest.approx(1.0)
    assert v.f == pytest.approx(v.f_area - v.f_shape, abs=1e-12)
    assert v.f_area == pytest.approx(math.sqrt((0.15 ** 2 + 0.02 ** 2) / 2))


def test_objective_is_deterministic():
    ps = assign_cells(make_ps(l_shape(), 0.2, [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5)], [0.6, 0.6, 0.6], [0.3, 0.3, 0.4]))
    assert objective(ps) == objective(ps)


def test_outline_perimeter_matches_polygons():
    ps = assign_cells(make_ps(l_shape(), 0.2, [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5)], [0.6, 0.6, 0.6], [0.3, 0.3, 0.4]))
    per = outline_perimeters(ps.grid, ps.assignment, ps.n)
    polys = partitions_to_polygons(ps)
    assert per == pytest.approx([geo.perimeter(q) for q in polys], rel=1e-12)


def test_polygon_examples():
    ps = assign_cells(make_ps(unit_square(), 0.5, [(0.5, 0.5)], [1.0]))
    (q,) = partitions_to_polygons(ps)
    assert geo.area(q) == pytest.approx(1.0)
    assert geo.perimeter(q) == pytest.approx(4.0)
    ps = assign_cells(make_ps(unit_square(), 0.5, [(0.25, 0.5), (0.75, 0.5)], [1.0, 1.0]))
    left, right = partitions_to_polygons(ps)
    for q in (left, right):
        xmin, ymin, xmax, ymax = q.bounds()
        assert (xmax - xmin, ymax - ymin) == pytest.approx((0.5, 1.0))
        assert geo.area(q) == pytest.approx(0.5)


def test_disconnected_partition_is_structural_error():
    g = build_grid(geo.rectangle(3, 1), 1.0)
    a = np.array([0, 1, 0])
    ps = PartitionSet(g, np.array([0.5, 0.5]), np.zeros((2, 2)), np.ones(2), a)
    with pytest.raises(StructuralError):
        partitions_to_polygons(ps)


def test_enclosed_partition_is_structural_error():
    g = build_grid(geo.rectangle(3, 3), 1.0)
    a = np.zeros(9, int)
    a[4] = 1
    ps = PartitionSet(g, np.array([0.5, 0.5]), np.zeros((2, 2)), np.ones(2), a)
    with pytest.raises(StructuralError):
        partitions_to_polygons(ps)


def test_weights_must_sum_to_one():
    g = build_grid(unit_square(), 0.5)
    with pytest.raises(ValueError):
        PartitionSet(g, np.array([0.5, 0.6]), np.zeros((2, 2)), np.ones(2))


@settings(max_examples=30, deadline=None)
@given(polygons(), st.integers(0, 2 ** 32 - 1))
def test_connected_partitions_reproduce_cell_areas(p, seed):
    from polypart.postprocess import fix_disconnected

    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = p.bounds()
    s = max(xmax - xmin, ymax - ymin) / 12
    n = 3
    centers = rng.uniform((xmin, ymin), (xmax, ymax), (n, 2))
    ps = fix_disconnected(assign_cells(make_ps(p, s, centers, rng.uniform(0.5, 2, n) * s)))
    polys = partitions_to_polygons(ps)
    areas = ps.geometric_areas()
    for q, a in zip(polys, areas):
        assert geo.area(q) == pytest.approx(a, rel=1e-6)
    assert sum(geo.area(q) for q in polys) == pytest.approx(geo.area(p), rel=1e-6)
    for i in range(n):
        assert len(components(ps.grid, np.flatnonzero(ps.assignment == i))) == 1
