import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polypart import compactness as cp
from polypart import geometry as geo

from conftest import polygons, unit_square

SQ = {
    "schwartzberg": math.sqrt(math.pi) / 2,
    "polsby_popper": math.pi / 4,
    "reock": 2 / math.pi,
    "two_balls": math.sqrt(2) / 2,
    "length_width": 1.0,
}
RECT41 = {
    "schwartzberg": 2 * math.sqrt(4 * math.pi) / 10,
    "polsby_popper": 16 * math.pi / 100,
    "reock": 4 / (math.pi * 17 / 4),
    "two_balls": 0.5 / (math.sqrt(17) / 2),
    "length_width": 0.25,
}


@pytest.mark.parametrize("name", list(SQ))
def test_unit_square_values(name):
    assert cp.METRIC_FUNCTIONS[cp.CompactnessMetric(name)](unit_square()) == pytest.approx(SQ[name], abs=1e-3)


@pytest.mark.parametrize("name", list(RECT41))
def test_four_by_one_rectangle_values(name):
    assert cp.METRIC_FUNCTIONS[cp.CompactnessMetric(name)](geo.rectangle(4, 1)) == pytest.approx(RECT41[name], abs=1e-3)


def test_two_by_one_rectangle_two_balls_and_rotated_length_width():
    assert cp.two_balls(geo.rectangle(2, 1)) == pytest.approx(0.5 / (math.sqrt(5) / 2), abs=1e-3)
    assert cp.length_width(geo.rectangle(2, 1).transformed(angle=math.radians(30))) == pytest.approx(0.5, abs=1e-9)


def test_circle_like_polygon_scores_near_one():
    r = cp.score_report(geo.regular_polygon(360))
    assert r.schwartzberg == pytest.approx(1.0, abs=1e-4)
    assert r.polsby_popper == pytest.approx(1.0, abs=2e-4)
    assert r.reock == pytest.approx(1.0, abs=1e-3)
    assert r.two_balls == pytest.approx(1.0, abs=1e-3)
    assert r.collective == pytest.approx(1.0, abs=1e-3)


def test_square_collective():
    assert cp.score_report(unit_square()).collective == pytest.approx(np.mean(list(SQ.values())), abs=1e-3)
    assert cp.score_report(unit_square()).collective == pytest.approx(0.80307, abs=1e-3)


def test_schwartzberg_from_degenerate():
    assert cp.schwartzberg_from(1.0, 0.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(polygons())
def test_scores_in_unit_interval_and_mean(p):
    r = cp.score_report(p)
    vals = [r.schwartzberg, r.polsby_popper, r.reock, r.two_balls, r.length_width]
    assert all(0 < v <= 1 + 1e-12 for v in vals)
    assert r.collective == pytest.approx(sum(vals) / 5, abs=1e-12)
    assert min(vals) <= r.collective <= max(vals)
    assert r.polsby_popper == pytest.approx(r.schwartzberg ** 2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(polygons(), st.floats(0.01, 100), st.floats(0, 2 * math.pi), st.floats(-50, 50), st.floats(-50, 50))
def test_scores_invariant_under_similarity(p, scale, angle, dx, dy):
    q = p.transformed(scale=scale, angle=angle, offset=(dx, dy))
    a, b = cp.score_report(p), cp.score_report(q)
    for name in ("schwartzberg", "polsby_popper", "reock", "length_width"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-9)
    # the inscribed radius is found to a tolerance proportional to size, so compare loosely
    assert b.two_balls == pytest.approx(a.two_balls, abs=3e-3)
