"""Batch benchmark over a polygon corpus and a matrix of weight cases."""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .optimize import OptimizerConfig
from .pipeline import decompose


def _normalised(w) -> tuple:
    w = np.asarray(w, float)
    return tuple((w / w.sum()).tolist())


# printed weights of cases 2 and 3 do not sum to one, so they are rescaled
CASE_WEIGHTS = {
    1: _normalised((0.5, 0.5)),
    2: _normalised((0.166, 0.333, 0.5)),
    3: _normalised((0.1, 0.2, 0.4, 0.5)),
    4: _normalised((0.2,) * 5),
}
RANDOM_CASE = 5


def case_instances(case: int, n_polygons: int, seed: int = 0) -> list[tuple[int, tuple]]:
    """``(polygon index, weights)`` pairs; the random case draws two weight vectors per polygon."""
    if case in CASE_WEIGHTS:
        return [(i, CASE_WEIGHTS[case]) for i in range(n_polygons)]
    if case != RANDOM_CASE:
        raise ValueError(f"unknown case {case}")
    rng = np.random.default_rng([seed, RANDOM_CASE])
    out = []
    for _ in range(2):
        for i in range(n_polygons):
            n = int(rng.integers(2, 10))
            w = rng.dirichlet(np.ones(n))
            out.append((i, _normalised(w)))
    return out


@dataclass(frozen=True)
class BenchConfig:
    algorithms: tuple
    tau: float
    seed: int = 0

    @property
    def label(self) -> str:
        return f"{'+'.join(a if isinstance(a, str) else a.value for a in self.algorithms)}@tau={self.tau:g}"


def _double_assignments(ps) -> int:
    """Cells listed in more than one partition."""
    seen, dup = set(), 0
    for part in ps.partitions:
        dup += len(seen & part.cells)
        seen |= part.cells
    return dup


def run_instance(args) -> dict:
    name, polygon, case, weights, cfg = args
    rec = {"polygon": name, "case": case, "config": cfg.label, "n": len(weights), "weights": list(weights)}
    t0 = time.perf_counter()
    try:
        r = decompose(polygon, weights, cfg_to_optimizer(cfg))
    except Exception as exc:  # recorded, the batch goes on
        rec.update(status="error", error=f"{type(exc).__name__}: {exc}", time=time.perf_counter() - t0)
        return rec
    rec.update(
        status=r.status,
        time=time.perf_counter() - t0,
        collective=r.mean_collective,
        mean_abs_error=float(np.mean([abs(s.area_error) for s in r.stats])),
        max_abs_error=r.max_error,
        max_cell_error=float(np.max(np.abs(r.cell_errors))),
        area_sum_error=abs(sum(s.area for s in r.stats) / r.grid.total_area - 1.0),
        cell_area_sum_error=abs(sum(geo.area(q) for q in r.cell_polygons) / geo.area(polygon) - 1.0),
        doubly_assigned=_double_assignments(r.partition_set),
        unassigned=int((r.partition_set.assignment < 0).sum()),
    )
    return rec


def cfg_to_optimizer(cfg: BenchConfig) -> OptimizerConfig:
    return OptimizerConfig(algorithms=tuple(cfg.algorithms), tau=cfg.tau, seed=cfg.seed)


def run_bench(polygons: list, cases=(1, 2, 3, 4, 5), configs=(BenchConfig(("pfh",), 0.05),),
              seed: int = 0, workers: int = 1) -> list[dict]:
    """``polygons`` is a list of ``(name, Polygon)``."""
    jobs = []
    for cfg in configs:
        for case in cases:
            for i, w in case_instances(case, len(polygons), seed):
                name, poly = polygons[i]
                jobs.append((name, poly, case, w, cfg))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(run_instance, jobs, chunksize=4))
    return [run_instance(j) for j in jobs]


def aggregate(records: list[dict]) -> list[dict]:
    groups: dict = {}
    for r in records:
        groups.setdefault((r["config"], r["case"]), []).append(r)
    out = []
    for (config, case), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        ok = [r for r in rs if r["status"] != "error"]
        out.append({
            "config": config,
            "case": case,
            "instances": len(rs),
            "failures": len(rs) - len(ok),
            "tolerance_unmet": sum(r["status"] == "tolerance_unmet" for r in ok),
            "mean_collective": float(np.mean([r["collective"] for r in ok])) if ok else None,
            "mean_abs_error": float(np.mean([r["mean_abs_error"] for r in ok])) if ok else None,
            "mean_time": float(np.mean([r["time"] for r in rs])),
        })
    return out


def format_table(summary: list[dict]) -> str:
    head = f"{'config':<24} {'case':>4} {'inst':>5} {'fail':>4} {'unmet':>5} {'collective':>10} {'|A_err|':>9} {'time[s]':>8}"
    lines = [head, "-" * len(head)]
    for s in summary:
        col = "n/a" if s["mean_collective"] is None else f"{s['mean_collective']:.4f}"
        err = "n/a" if s["mean_abs_error"] is None else f"{s['mean_abs_error']:.5f}"
        lines.append(f"{s['config']:<24} {s['case']:>4} {s['instances']:>5} {s['failures']:>4} "
                     f"{s['tolerance_unmet']:>5} {col:>10} {err:>9} {s['mean_time']:>8.4f}")
    return "\n".join(lines)


def write_report(records: list[dict], out_dir) -> dict:
    from pathlib import Path

    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    summary = aggregate(records)
    (d / "report.json").write_text(json.dumps({"summary": summary, "instances": records}, indent=1) + "\n")
    (d / "report.txt").write_text(format_table(summary) + "\n")
    return {"summary": summary}
