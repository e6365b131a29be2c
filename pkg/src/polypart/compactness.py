"""Compactness scores mapping a polygon to (0, 1], 1 being a disc."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict

from . import geometry as geo


class CompactnessMetric(str, enum.Enum):
    SCHWARTZBERG = "schwartzberg"
    POLSBY_POPPER = "polsby_popper"
    REOCK = "reock"
    TWO_BALLS = "two_balls"
    LENGTH_WIDTH = "length_width"


def schwartzberg(p) -> float:
    return schwartzberg_from(geo.area(p), geo.perimeter(p))


def schwartzberg_from(area: float, perimeter: float) -> float:
    if perimeter <= 0:
        return 0.0
    return 2.0 * math.sqrt(math.pi * area) / perimeter


def polsby_popper(p) -> float:
    per = geo.perimeter(p)
    return 4.0 * math.pi * geo.area(p) / (per * per)


def reock(p) -> float:
    r = geo.min_enclosing_circle(p).radius
    return geo.area(p) / (math.pi * r * r)


def two_balls(p, tol: float | None = None) -> float:
    # circumference ratio reduces to the radius ratio
    inner = geo.max_inscribed_circle(p, tol).radius
    outer = geo.min_enclosing_circle(p).radius
    return inner / outer


def length_width(p) -> float:
    hw, hl = sorted(geo.rotated_min_bounding_rect(p).half_extents)
    return hw / hl


METRIC_FUNCTIONS = {
    CompactnessMetric.SCHWARTZBERG: schwartzberg,
    CompactnessMetric.POLSBY_POPPER: polsby_popper,
    CompactnessMetric.REOCK: reock,
    CompactnessMetric.TWO_BALLS: two_balls,
    CompactnessMetric.LENGTH_WIDTH: length_width,
}


@dataclass(frozen=True)
class ScoreReport:
    schwartzberg: float
    polsby_popper: float
    reock: float
    two_balls: float
    length_width: float

    @property
    def collective(self) -> float:
        return (self.schwartzberg + self.polsby_popper + self.reock + self.two_balls + self.length_width) / 5.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["collective"] = self.collective
        return d


def score_report(p) -> ScoreReport:
    return ScoreReport(
        schwartzberg=schwartzberg(p),
        polsby_popper=polsby_popper(p),
        reock=reock(p),
        two_balls=two_balls(p),
        length_width=length_width(p),
    )
