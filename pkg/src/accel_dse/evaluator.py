"""Analytical stand-in for HLS evaluation, driven by a calibration profile.

Latency per module follows alpha * ceil(L / lanes) + beta, with a separate
idle constant for L = 0 and lane scaling applied only to compute-kind
modules. Total latency is the overlapped-dataflow maximum plus a handoff.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .design_space import DeviceProfile, load_device
from .errors import ExternalToolFailure, ProfileMissingModule, ValidationError
from .templates import AcceleratorDesign, get_template

INFEASIBLE = math.inf

RESOURCE_KEYS = ("bram_18k", "dsp", "ff", "lut")


@dataclass(frozen=True)
class ModuleCoefficients:
    alpha: float  # cycles per element
    beta: int  # fixed cycles
    idle: int  # cycles reported at L = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.idle < 0:
            raise ValidationError("module_coefficients", "alpha/beta/idle must be >= 0")


@dataclass(frozen=True)
class CalibrationProfile:
    modules: dict  # module name -> ModuleCoefficients
    total_handoff: int
    dsp_per_multiplier: int
    ff_base: int
    lut_base: int
    ff_per_lane: int
    lut_per_lane: int
    estimated_path_ns: float
    declared_l_max: int
    bram_bits_per_block: int = 18432

    def __post_init__(self):
        if self.bram_bits_per_block <= 0:
            raise ValidationError("bram_bits_per_block", "must be > 0")
        if self.estimated_path_ns <= 0:
            raise ValidationError("estimated_path_ns", "must be > 0")
        if self.declared_l_max < 1:
            raise ValidationError("declared_l_max", "must be >= 1")


@dataclass(frozen=True)
class EvaluationReport:
    module_cycles: dict  # module name -> cycles
    total_cycles: int
    initiation_interval: int
    wall_time_ns: float
    resources: dict  # resource key -> used
    utilization_pct: dict  # resource key -> floor percent
    timing_pass: bool
    feasible: bool
    objective: float  # total_cycles when feasible, INFEASIBLE otherwise

    def to_dict(self) -> dict:
        return {
            "module_cycles": dict(self.module_cycles),
            "total_cycles": self.total_cycles,
            "initiation_interval": self.initiation_interval,
            "wall_time_ns": self.wall_time_ns,
            "resources": dict(self.resources),
            "utilization_pct": dict(self.utilization_pct),
            "timing_pass": self.timing_pass,
            "feasible": self.feasible,
            # null stands in for the +inf sentinel in JSON
            "objective": None if math.isinf(self.objective) else self.objective,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvaluationReport":
        objective = doc["objective"]
        return cls(
            module_cycles=dict(doc["module_cycles"]),
            total_cycles=int(doc["total_cycles"]),
            initiation_interval=int(doc["initiation_interval"]),
            wall_time_ns=float(doc["wall_time_ns"]),
            resources=dict(doc["resources"]),
            utilization_pct=dict(doc["utilization_pct"]),
            timing_pass=bool(doc["timing_pass"]),
            feasible=bool(doc["feasible"]),
            objective=INFEASIBLE if objective is None else float(objective),
        )


def profile_from_dict(doc: dict) -> CalibrationProfile:
    modules = {
        name: ModuleCoefficients(alpha=row["alpha"], beta=row["beta"], idle=row["idle"])
        for name, row in doc["modules"].items()
    }
    return CalibrationProfile(
        modules=modules,
        total_handoff=doc["total_handoff"],
        dsp_per_multiplier=doc["dsp_per_multiplier"],
        ff_base=doc["ff_base"],
        lut_base=doc["lut_base"],
        ff_per_lane=doc["ff_per_lane"],
        lut_per_lane=doc["lut_per_lane"],
        estimated_path_ns=doc["estimated_path_ns"],
        declared_l_max=doc["declared_l_max"],
        bram_bits_per_block=doc.get("bram_bits_per_block", 18432),
    )


def load_profile(path) -> CalibrationProfile:
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def shipped_vecmul_profile() -> CalibrationProfile:
    """Calibration profile packaged with the library for the vecmul template."""
    text = resources.files("accel_dse.data").joinpath("vecmul_profile.json").read_text("utf-8")
    return profile_from_dict(json.loads(text))


def shipped_xc7z020_device() -> DeviceProfile:
    text = resources.files("accel_dse.data").joinpath("xc7z020.json").read_text("utf-8")
    return load_device(text)


def estimate_latency(d: AcceleratorDesign, prof: CalibrationProfile) -> tuple[dict, int]:
    """Per-module cycles and total cycles for the design's workload size."""
    template = get_template(d.template_id)
    length = d.workload.length_l
    par = d.point.parallelism_p
    per_module: dict[str, int] = {}
    for module in template.hw_modules:
        if module.name not in prof.modules:
            raise ProfileMissingModule(f"profile has no coefficients for module {module.name!r}")
        coeff = prof.modules[module.name]
        if length == 0:
            per_module[module.name] = coeff.idle
        else:
            lanes = par if module.kind == "compute" else 1
            per_module[module.name] = int(math.ceil(coeff.alpha * math.ceil(length / lanes))) + coeff.beta
    total = 0 if length == 0 else max(per_module.values()) + prof.total_handoff
    return per_module, total


def estimate_resources(d: AcceleratorDesign, prof: CalibrationProfile) -> dict:
    template = get_template(d.template_id)
    depth = d.point.buffer_depth
    width = d.point.data_width
    par = d.point.parallelism_p
    bram = sum(
        math.ceil(depth * width / prof.bram_bits_per_block) for _ in template.buffers
    )
    return {
        "bram_18k": bram,
        "dsp": prof.dsp_per_multiplier * par,
        "ff": prof.ff_base + prof.ff_per_lane * (par - 1),
        "lut": prof.lut_base + prof.lut_per_lane * (par - 1),
    }


def utilization_pct(used: int, available: int) -> int:
    if available <= 0:
        raise ValidationError("available", "available must be > 0")
    if used < 0:
        raise ValidationError("used", "used must be >= 0")
    return (100 * used) // available


def check_timing(prof: CalibrationProfile, dev: DeviceProfile) -> bool:
    return prof.estimated_path_ns <= dev.clock_target_ns


def evaluate(d: AcceleratorDesign, dev: DeviceProfile, prof: CalibrationProfile) -> EvaluationReport:
    """Compose latency, resources, utilization, and timing into one report."""
    per_module, total = estimate_latency(d, prof)
    resources_used = estimate_resources(d, prof)
    capacities = {"bram_18k": dev.bram_18k, "dsp": dev.dsp, "ff": dev.ff, "lut": dev.lut}
    util = {k: utilization_pct(resources_used[k], capacities[k]) for k in RESOURCE_KEYS}
    timing_pass = check_timing(prof, dev)
    fits = all(resources_used[k] <= capacities[k] for k in RESOURCE_KEYS)
    feasible = timing_pass and fits
    return EvaluationReport(
        module_cycles=per_module,
        total_cycles=total,
        initiation_interval=total,
        wall_time_ns=total * dev.clock_target_ns,
        resources=resources_used,
        utilization_pct=util,
        timing_pass=timing_pass,
        feasible=feasible,
        objective=float(total) if feasible else INFEASIBLE,
    )


def run_external_evaluator(cmd, d: AcceleratorDesign, run_folder) -> EvaluationReport:
    """Invoke an external evaluator on an emitted run folder.

    The command receives the run folder path as its sole extra argument and
    must write report.json into that folder.
    """
    run_folder = Path(run_folder)
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    argv.append(str(run_folder))
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=600)
    except (OSError, subprocess.SubprocessError) as exc:
        raise ExternalToolFailure(f"external evaluator failed to run: {exc}") from exc
    if proc.returncode != 0:
        raise ExternalToolFailure(
            f"external evaluator exited {proc.returncode}",
            diagnostics=proc.stderr or proc.stdout,
        )
    report_path = run_folder / "report.json"
    try:
        doc = json.loads(report_path.read_text(encoding="utf-8"))
        return EvaluationReport.from_dict(doc)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ExternalToolFailure(
            f"external evaluator wrote an unusable report: {exc}",
            diagnostics=str(exc),
        ) from exc
