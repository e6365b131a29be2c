"""Initialisation, PFH, CMA-ES, random search and their composition."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import geometry as geo
from .compactness import CompactnessMetric
from .geometry import Polygon
from .grid import Grid, build_grid, compute_cell_size
from .partition import (
    PartitionSet,
    assign_cells,
    assign_from,
    objective,
    objective_terms,
    partition_sums,
    shape_scores,
)


class ConfigError(ValueError):
    pass


class Algorithm(str, enum.Enum):
    PFH = "pfh"
    CMAES = "cmaes"
    RANDOM_SEARCH = "random"

    @classmethod
    def parse(cls, text: str) -> "Algorithm":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"pfh": cls.PFH, "cmaes": cls.CMAES, "cma": cls.CMAES,
                   "random": cls.RANDOM_SEARCH, "randomsearch": cls.RANDOM_SEARCH, "rs": cls.RANDOM_SEARCH}
        if key not in aliases:
            raise ConfigError(f"unknown algorithm {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class OptimizerConfig:
    algorithms: tuple = (Algorithm.PFH,)
    tau: float = 0.05
    max_iter_pfh: int = 100
    budget_evals: int = 3000
    population: int | None = None  # None -> 4 + floor(3 ln(3n))
    sigma0: float | None = None  # fraction of the bounding-box diagonal; None -> see step_size()
    seed: int = 0
    pi_c: float = 10.0
    metric: CompactnessMetric = CompactnessMetric.SCHWARTZBERG

    def __post_init__(self):
        algs = tuple(a if isinstance(a, Algorithm) else Algorithm.parse(a) for a in self.algorithms)
        object.__setattr__(self, "algorithms", algs)
        if not algs:
            raise ConfigError("at least one optimisation algorithm is required")
        if len(set(algs)) != len(algs):
            raise ConfigError("algorithms must not repeat")
        if not (0 < self.tau <= 1):
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")
        if self.max_iter_pfh < 1 or self.budget_evals < 0:
            raise ConfigError("budgets must be non-negative and max_iter_pfh >= 1")
        if self.population is not None and self.population < 4 and Algorithm.CMAES in algs:
            raise ConfigError("CMA-ES population must be at least 4")
        if self.sigma0 is not None and self.sigma0 <= 0:
            raise ConfigError("sigma0 must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def step_size(self) -> float:
        """Initial CMA-ES step as a fraction of the bounding-box diagonal.

        A cold start explores broadly; refining a PFH result uses a step near
        the cell size, since broad steps never beat the seed within budget.
        """
        if self.sigma0 is not None:
            return self.sigma0
        return 0.01 if Algorithm.PFH in self.algorithms else 0.25

    def ordered(self) -> tuple:
        # PFH always seeds the refiners
        return tuple(sorted(self.algorithms, key=lambda a: a is not Algorithm.PFH))


# --- initialisation -----------------------------------------------------------


def init_partitions(p: Polygon, weights: Sequence[float], grid: Grid | None = None,
                    s: float | None = None) -> PartitionSet:
    """Centres evenly spaced along the boundary from vertex 0; circle area equals the target area."""
    w = np.asarray(list(weights), float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1 (got {w.sum():.12g})")
    A = geo.area(p)
    if grid is None:
        grid = build_grid(p, s if s is not None else compute_cell_size(0.05, w, A))
    n = len(w)
    per = geo.perimeter(p)
    centers = geo.ring_points_at_arclength(p, [k * per / n for k in range(n)])
    radii = np.sqrt(w * A / math.pi)
    return PartitionSet(grid, w, np.asarray(centers, float), radii)


# --- PFH ------------------------------------------------------------------------


def update_radius(r: float, area: float, target: float, it: int, max_iter: int) -> float:
    xi = (max_iter - it) / (2.0 * max_iter)
    delta = xi * (area / target - 1.0)
    return r / (delta + 1.0)


@dataclass
class Trace:
    """Objective history, one entry per evaluated configuration kept by a stage."""
    records: list = field(default_factory=list)

    def add(self, stage: str, value: float):
        self.records.append((stage, float(value)))


def _penalised(ps: PartitionSet, cfg: OptimizerConfig) -> float:
    return objective(ps, cfg.pi_c, cfg.tau, cfg.metric).total


def pfh(ps: PartitionSet, cfg: OptimizerConfig, trace: Trace | None = None) -> PartitionSet:
    grid = ps.grid
    targets = ps.targets()
    centers = np.array(ps.centers, float)
    radii = np.array(ps.radii, float)
    if (ps.assignment < 0).any():
        cur = assign_cells(ps)
    else:
        cur = ps
    best, best_val = cur, _penalised(cur, cfg)
    if trace is not None:
        trace.add("pfh", best_val)
    max_iter = cfg.max_iter_pfh
    it = 1
    while True:
        masses = cur.masses()
        if np.all(np.abs(masses - targets) <= cfg.tau * targets):
            break
        xi = (max_iter - it) / (2.0 * max_iter)
        delta = xi * (masses / targets - 1.0)
        radii = radii / (delta + 1.0)
        a = assign_from(grid, centers, radii)
        cnt = np.bincount(a, minlength=ps.n)
        sx = np.bincount(a, weights=grid.centers[:, 0], minlength=ps.n)
        sy = np.bincount(a, weights=grid.centers[:, 1], minlength=ps.n)
        cur = ps.with_params(centers=centers.copy(), radii=radii.copy(), assignment=a)
        val = _penalised(cur, cfg)
        if trace is not None:
            trace.add("pfh", val)
        if val < best_val:
            best, best_val = cur, val
        nz = cnt > 0
        centers = centers.copy()
        centers[nz, 0] = sx[nz] / cnt[nz]
        centers[nz, 1] = sy[nz] / cnt[nz]
        it += 1
        if it >= max_iter:
            break
    # centroids computed after the last assignment would not match it; the
    # returned state always pairs parameters with their own assignment
    return best


# --- black-box refiners ---------------------------------------------------------


def make_evaluator(ps: PartitionSet, cfg: OptimizerConfig) -> Callable[[np.ndarray], float]:
    """Penalised objective of a flat ``(x, y, r)`` vector."""
    grid = ps.grid
    n = ps.n
    targets = ps.targets()
    lo, hi = param_bounds(ps)

    def evaluate(x) -> float:
        v = np.clip(np.asarray(x, float), lo, hi).reshape(n, 3)
        a = assign_from(grid, v[:, :2], v[:, 2])
        errors = (partition_sums(a, grid.weights, n) - targets) / targets
        shapes = shape_scores(grid, a, n, cfg.metric)
        return objective_terms(errors, shapes, cfg.pi_c, cfg.tau).total

    return evaluate


def param_bounds(ps: PartitionSet) -> tuple[np.ndarray, np.ndarray]:
    xmin, ymin, xmax, ymax = ps.grid.polygon.bounds()
    diag = math.hypot(xmax - xmin, ymax - ymin)
    rmin = ps.grid.cell_size / 2.0
    lo = np.tile([xmin, ymin, rmin], ps.n)
    hi = np.tile([xmax, ymax, max(diag, rmin)], ps.n)
    return lo, hi


def cmaes_minimize(initial, evaluate: Callable, cfg: OptimizerConfig, bounds=None,
                   scale: float = 1.0, trace: Trace | None = None) -> np.ndarray:
    """Best-so-far CMA-ES minimum. The configured step is multiplied by ``scale``."""
    import cma

    x0 = np.asarray(initial, float)
    f0 = float(evaluate(x0))
    if trace is not None:
        trace.add("cmaes", f0)
    if cfg.budget_evals <= 0:
        return x0
    dim = x0.size
    popsize = cfg.population or 4 + int(math.floor(3 * math.log(dim)))
    lo, hi = bounds if bounds is not None else (None, None)

    def clamp(x):
        return np.clip(x, lo, hi) if lo is not None else x

    opts = {
        "seed": int(cfg.seed % (2 ** 32 - 1)) + 1,
        "popsize": popsize,
        "maxfevals": cfg.budget_evals,
        "verbose": -9,
        "verb_log": 0,
        "verb_disp": 0,
        "tolfun": 0.0,
        "tolfunhist": 0.0,
        "tolx": 1e-14,
        "tolstagnation": 10 ** 9,
        "tolflatfitness": 10 ** 9,
    }
    es = cma.CMAEvolutionStrategy(x0.tolist(), cfg.step_size() * scale, opts)
    best_x, best_f = x0, f0
    evals = 0
    while evals < cfg.budget_evals:
        sols = es.ask()
        room = cfg.budget_evals - evals
        fs = []
        for k, s in enumerate(sols):
            if k < room:
                xs = clamp(np.asarray(s, float))
                f = float(evaluate(xs))
                evals += 1
                if f < best_f:
                    best_x, best_f = xs, f
            else:
                f = math.inf
            fs.append(f)
        if trace is not None:
            trace.add("cmaes", best_f)
        if room < len(sols):
            break
        es.tell(sols, fs)
        if es.stop() and not set(es.stop()) <= {"maxfevals"}:
            break
    return np.array(best_x, float)


def random_search(initial, evaluate: Callable, cfg: OptimizerConfig, bounds,
                  trace: Trace | None = None) -> np.ndarray:
    """Uniform samples in the box; the initial vector competes too."""
    x0 = np.asarray(initial, float)
    best_x, best_f = x0, float(evaluate(x0))
    lo, hi = bounds
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.budget_evals):
        x = rng.uniform(lo, hi)
        f = float(evaluate(x))
        if f < best_f:
            best_x, best_f = x, f
        if trace is not None:
            trace.add("random", best_f)
    return np.array(best_x, float)


def run_pipeline(p: Polygon, weights: Sequence[float], cfg: OptimizerConfig, grid: Grid | None = None,
                 trace: Trace | None = None) -> PartitionSet:
    w = np.asarray(list(weights), float)
    if grid is None:
        grid = build_grid(p, compute_cell_size(cfg.tau, w, geo.area(p)), min_cells=len(w))
    ps = init_partitions(p, w, grid=grid)
    ps = assign_cells(ps)
    for alg in cfg.ordered():
        if alg is Algorithm.PFH:
            ps = pfh(ps, cfg, trace)
            continue
        evaluate = make_evaluator(ps, cfg)
        lo, hi = param_bounds(ps)
        x0 = np.clip(ps.params(), lo, hi)
        if alg is Algorithm.CMAES:
            diag = math.hypot(*(np.subtract(hi, lo)[:2]))
            x = cmaes_minimize(x0, evaluate, cfg, bounds=(lo, hi), scale=diag, trace=trace)
        else:
            x = random_search(x0, evaluate, cfg, (lo, hi), trace=trace)
        # keep the incoming state if the refiner could not beat it (clamping may shift x0)
        cand = assign_cells(ps.from_params(x))
        if _penalised(cand, cfg) <= _penalised(ps, cfg):
            ps = cand
    return assign_cells(ps)
