import math

import numpy as np
import pytest
from hypothesis import strategies as st

from polypart import geometry as geo
from polypart.corpus import random_polygon

CRITERIA: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@st.composite
def polygons(draw, min_vertices=5, max_vertices=16):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(min_vertices, max_vertices))
    rng = np.random.default_rng(seed)
    for _ in range(50):
        p = random_polygon(rng, n, radius=draw(st.sampled_from([1.0, 10.0, 250.0])))
        if p is not None:
            return p
    return geo.regular_polygon(n, 1.0)


def unit_square():
    return geo.rectangle(1.0, 1.0)


def l_shape():
    return geo.Polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])


def to_shapely(p):
    from shapely.geometry import Polygon as SP

    return SP(np.asarray(p.coords))


@pytest.fixture(scope="session")
def corpus50():
    from polypart.corpus import generate

    return generate(50, seed=0)


def approx(a, b, tol):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)
