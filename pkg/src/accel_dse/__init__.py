"""Desk-scale FPGA accelerator design space exploration.

Enumerate directive-bounded parameter points, instantiate load-compute-store
accelerator templates, score them with a calibrated analytical cost model,
persist hardware data points, and drive iterative refinement through a
retrieval-grounded advisor with a human verdict workflow.
"""

from .design_space import (
    DeviceProfile,
    Directives,
    ParameterPoint,
    WorkloadSpec,
    enumerate_points,
    neighbor_points,
    validate_point,
)
from .evaluator import EvaluationReport, evaluate, shipped_vecmul_profile, shipped_xc7z020_device
from .explorer import Exploration, ExplorationConfig, run_exploration
from .templates import builtin_vecmul_template, emit_source, instantiate

__all__ = [
    "DeviceProfile",
    "Directives",
    "EvaluationReport",
    "Exploration",
    "ExplorationConfig",
    "ParameterPoint",
    "WorkloadSpec",
    "builtin_vecmul_template",
    "emit_source",
    "enumerate_points",
    "evaluate",
    "instantiate",
    "neighbor_points",
    "run_exploration",
    "shipped_vecmul_profile",
    "shipped_xc7z020_device",
    "validate_point",
]
