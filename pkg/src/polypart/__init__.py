"""Grid-based potential-field decomposition of simple polygons into weighted sub-polygons."""
from .compactness import CompactnessMetric, ScoreReport, score_report
from .geometry import GeometryError, Polygon
from .grid import Grid, WeightRaster, attach_weights, build_grid, compute_cell_size
from .optimize import Algorithm, OptimizerConfig, run_pipeline
from .partition import PartitionSet, StructuralError, assign_cells, objective, partitions_to_polygons
from .pipeline import DecompositionResult, decompose
from .postprocess import fix_disconnected, rebalance_cell_counts
from .simplify import SimplifyConfig, green, simplify_borders

__all__ = [
    "Algorithm",
    "CompactnessMetric",
    "DecompositionResult",
    "GeometryError",
    "Grid",
    "OptimizerConfig",
    "PartitionSet",
    "Polygon",
    "ScoreReport",
    "SimplifyConfig",
    "StructuralError",
    "WeightRaster",
    "assign_cells",
    "attach_weights",
    "build_grid",
    "compute_cell_size",
    "decompose",
    "fix_disconnected",
    "green",
    "objective",
    "partitions_to_polygons",
    "rebalance_cell_counts",
    "run_pipeline",
    "score_report",
    "simplify_borders",
]
