"""Accelerator templates, design instantiation, and run-folder source emission."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .design_space import ParameterPoint, WorkloadSpec
from .errors import UnsupportedTemplate, ValidationError

EXTERNAL = "external"
MODULE_KINDS = ("main", "load", "compute", "store")


@dataclass(frozen=True)
class HwModule:
    name: str
    kind: str


@dataclass(frozen=True)
class Buffer:
    name: str
    role: str  # "input" | "output"


@dataclass(frozen=True)
class Stream:
    name: str
    producer: str
    consumer: str


@dataclass(frozen=True)
class AcceleratorTemplate:
    template_id: str
    hw_modules: tuple[HwModule, ...]
    buffers: tuple[Buffer, ...]
    streams: tuple[Stream, ...]


@dataclass(frozen=True)
class ComplianceVerdict:
    ok: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class AcceleratorDesign:
    template_id: str
    point: ParameterPoint
    workload: WorkloadSpec
    design_id: str


@dataclass(frozen=True)
class SourceSet:
    files: dict  # relative path -> text content


def builtin_vecmul_template() -> AcceleratorTemplate:
    """Load-compute-store vector multiplier: streams X and Y in, Z out."""
    return AcceleratorTemplate(
        template_id="vecmul",
        hw_modules=(
            HwModule("HW_MAIN", "main"),
            HwModule("Send", "load"),
            HwModule("Compute", "compute"),
            HwModule("Recv", "store"),
        ),
        buffers=(
            Buffer("X", "input"),
            Buffer("Y", "input"),
            Buffer("Z", "output"),
        ),
        streams=(
            Stream("x_in", EXTERNAL, "Send"),
            Stream("y_in", EXTERNAL, "Send"),
            Stream("x_fill", "Send", "X"),
            Stream("y_fill", "Send", "Y"),
            Stream("x_read", "X", "Compute"),
            Stream("y_read", "Y", "Compute"),
            Stream("z_fill", "Compute", "Z"),
            Stream("z_drain", "Z", "Recv"),
            Stream("z_out", "Recv", EXTERNAL),
        ),
    )


_TEMPLATES = {"vecmul": builtin_vecmul_template}


def get_template(template_id: str) -> AcceleratorTemplate:
    try:
        return _TEMPLATES[template_id]()
    except KeyError:
        raise UnsupportedTemplate(f"unknown template_id {template_id!r}") from None


def check_compliance(t: AcceleratorTemplate) -> ComplianceVerdict:
    """Structural checks: one main module, resolvable stream endpoints, and
    exactly one writer and one reader per buffer."""
    violations = []
    module_names = {m.name for m in t.hw_modules}
    buffer_names = {b.name for b in t.buffers}
    endpoints = module_names | buffer_names | {EXTERNAL}

    mains = [m.name for m in t.hw_modules if m.kind == "main"]
    if len(mains) == 0:
        violations.append("no main module")
    elif len(mains) > 1:
        violations.append("multiple main modules")
    for m in t.hw_modules:
        if m.kind not in MODULE_KINDS:
            violations.append(f"module {m.name} has unknown kind {m.kind!r}")

    for s in t.streams:
        if s.producer not in endpoints:
            violations.append(f"stream {s.name} has unknown producer {s.producer!r}")
        if s.consumer not in endpoints:
            violations.append(f"stream {s.name} has unknown consumer {s.consumer!r}")

    for b in t.buffers:
        writers = [s.producer for s in t.streams if s.consumer == b.name and s.producer in module_names]
        readers = [s.consumer for s in t.streams if s.producer == b.name and s.consumer in module_names]
        if len(writers) == 0:
            violations.append(f"buffer {b.name} has no writer")
        elif len(writers) > 1:
            violations.append(f"buffer {b.name} has multiple writers")
        if len(readers) == 0:
            violations.append(f"buffer {b.name} has no reader")
        elif len(readers) > 1:
            violations.append(f"buffer {b.name} has multiple readers")

    return ComplianceVerdict(ok=not violations, violations=tuple(violations))


def compute_design_id(template_id: str, p: ParameterPoint, w: WorkloadSpec) -> str:
    """Content hash over a canonical serialization; the dedup key for the cost db."""
    canonical = json.dumps(
        {
            "template_id": template_id,
            "point": p.as_dict(),
            "workload": {
                "kernel_kind": w.kernel_kind,
                "length_l": w.length_l,
                "data_width": w.data_width,
                "name": w.name,
            },
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def instantiate(t: AcceleratorTemplate, p: ParameterPoint, w: WorkloadSpec) -> AcceleratorDesign:
    """Bind a parameter point to a template; the design id is deterministic."""
    if p.buffer_depth < w.length_l:
        raise ValidationError("buffer_depth", "buffer_depth < length_l")
    if w.length_l > 0 and p.parallelism_p > w.length_l:
        raise ValidationError("parallelism_p", "parallelism_p > length_l")
    return AcceleratorDesign(
        template_id=t.template_id,
        point=p,
        workload=w,
        design_id=compute_design_id(t.template_id, p, w),
    )


def design_to_dict(d: AcceleratorDesign) -> dict:
    return {
        "template_id": d.template_id,
        "point": d.point.as_dict(),
        "workload": {
            "kernel_kind": d.workload.kernel_kind,
            "length_l": d.workload.length_l,
            "data_width": d.workload.data_width,
            "name": d.workload.name,
        },
        "design_id": d.design_id,
    }


def design_from_dict(doc: dict) -> AcceleratorDesign:
    point = ParameterPoint(**doc["point"])
    workload = WorkloadSpec(**doc["workload"])
    design_id = doc.get("design_id") or compute_design_id(doc["template_id"], point, workload)
    return AcceleratorDesign(doc["template_id"], point, workload, design_id)


_VECMUL_ACCEL = """\
// Element-wise vector multiply accelerator (load-compute-store)
// Generated for design {design_id}

#define DEPTH {depth}
#define P {par}
#define WIDTH {width}
#define L {length}

SC_MODULE(Send) {{
  // Drains the x_in / y_in AXI-Stream interfaces into the on-chip buffers.
  sc_int<WIDTH> X[DEPTH];
  sc_int<WIDTH> Y[DEPTH];
  void load() {{
    for (int i = 0; i < L; i++) {{
      X[i] = x_in.read();
      Y[i] = y_in.read();
    }}
  }}
}};

SC_MODULE(Compute) {{
  // P lanes of element-wise multiplication into the Z buffer.
  sc_int<WIDTH> Z[DEPTH];
  void run() {{
    for (int i = 0; i < L; i += P) {{
      for (int l = 0; l < P; l++) {{
        Z[i + l] = X[i + l] * Y[i + l];
      }}
    }}
  }}
}};

SC_MODULE(Recv) {{
  // Streams the Z buffer back out over z_out.
  void store() {{
    for (int i = 0; i < L; i++) {{
      z_out.write(Z[i]);
    }}
  }}
}};

SC_MODULE(HW_MAIN) {{
  // Top-level control: kick off Send, Compute, Recv in dataflow order.
  Send send;
  Compute compute;
  Recv recv;
}};
"""

_VECMUL_DRIVER = """\
// Software driver for design {design_id}
// Streams X and Y into the accelerator and reads Z back.

#define L {length}

void run_vecmul(const int *x, const int *y, int *z) {{
  for (int i = 0; i < L; i++) stream_write(X_CHANNEL, x[i]);
  for (int i = 0; i < L; i++) stream_write(Y_CHANNEL, y[i]);
  start_accelerator();
  for (int i = 0; i < L; i++) z[i] = stream_read(Z_CHANNEL);
}}
"""


def emit_source(d: AcceleratorDesign) -> SourceSet:
    """Emit the run-folder source set: accelerator description, driver, manifest."""
    if d.template_id != "vecmul":
        raise UnsupportedTemplate(f"unknown template_id {d.template_id!r}")
    accel = _VECMUL_ACCEL.format(
        design_id=d.design_id,
        depth=d.point.buffer_depth,
        par=d.point.parallelism_p,
        width=d.point.data_width,
        length=d.workload.length_l,
    )
    driver = _VECMUL_DRIVER.format(design_id=d.design_id, length=d.workload.length_l)
    manifest = json.dumps(
        {
            "design_id": d.design_id,
            "top": "HW_MAIN",
            "sources": ["accelerator.sc", "driver.cc"],
            "template_id": d.template_id,
        },
        indent=2,
        sort_keys=True,
    ) + "\n"
    return SourceSet(
        files={
            "accelerator.sc": accel,
            "driver.cc": driver,
            "build_manifest.json": manifest,
        }
    )
