"""Workloads, devices, directive-bounded parameter spaces, and point validation.

All types are immutable value objects; all operations are pure.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ParseError, ValidationError

KERNEL_KINDS = ("vecmul",)
DATA_WIDTHS = (8, 16, 32)


@dataclass(frozen=True)
class WorkloadSpec:
    """A single-kernel workload: an element count and an element width.

    Documents must carry length_l >= 1; length_l == 0 is allowed only when
    constructed programmatically, to probe module idle latencies.
    """

    kernel_kind: str
    length_l: int
    data_width: int = 32
    name: str = ""

    def __post_init__(self):
        if self.kernel_kind not in KERNEL_KINDS:
            raise ValidationError("kernel_kind", f"unknown kernel_kind {self.kernel_kind!r}")
        if not isinstance(self.length_l, int) or self.length_l < 0:
            raise ValidationError("length_l", "length_l must be >= 0")
        if self.data_width not in DATA_WIDTHS:
            raise ValidationError("data_width", f"data_width must be one of {DATA_WIDTHS}")


@dataclass(frozen=True)
class DeviceProfile:
    """FPGA device capacities and the synthesis clock target."""

    name: str
    bram_18k: int
    dsp: int
    ff: int
    lut: int
    clock_target_ns: float

    def __post_init__(self):
        for field_name in ("bram_18k", "dsp", "ff", "lut"):
            if getattr(self, field_name) < 0:
                raise ValidationError(field_name, f"{field_name} must be >= 0")
        if self.clock_target_ns <= 0:
            raise ValidationError("clock_target_ns", "clock_target_ns must be > 0")


def _check_directive_set(name: str, values: tuple[int, ...]) -> None:
    if len(values) == 0:
        raise ValidationError(name, f"{name} directive set is empty")
    if any(v < 1 for v in values):
        raise ValidationError(name, f"{name} values must be positive")
    if list(values) != sorted(set(values)):
        raise ValidationError(name, f"{name} must be sorted ascending with no duplicates")


@dataclass(frozen=True)
class Directives:
    """Per-parameter bounded sets of admissible values (sorted, unique)."""

    buffer_depth: tuple[int, ...]
    parallelism_p: tuple[int, ...]
    data_width: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "buffer_depth", tuple(self.buffer_depth))
        object.__setattr__(self, "parallelism_p", tuple(self.parallelism_p))
        object.__setattr__(self, "data_width", tuple(self.data_width))
        _check_directive_set("buffer_depth", self.buffer_depth)
        _check_directive_set("parallelism_p", self.parallelism_p)
        _check_directive_set("data_width", self.data_width)

    def set_for(self, field_name: str) -> tuple[int, ...]:
        return getattr(self, field_name)


@dataclass(frozen=True, order=True)
class ParameterPoint:
    """One concrete assignment of architectural parameters.

    Field order defines the lexicographic ordering used for enumeration
    and objective tie-breaking.
    """

    buffer_depth: int
    parallelism_p: int
    data_width: int

    def __post_init__(self):
        for field_name in ("buffer_depth", "parallelism_p", "data_width"):
            if getattr(self, field_name) < 1:
                raise ValidationError(field_name, f"{field_name} must be positive")

    def as_dict(self) -> dict:
        return {
            "buffer_depth": self.buffer_depth,
            "parallelism_p": self.parallelism_p,
            "data_width": self.data_width,
        }


PARAM_FIELDS = ("buffer_depth", "parallelism_p", "data_width")


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    reasons: tuple[str, ...] = ()


def _load_json_document(source) -> dict:
    """Load a JSON object from a path, file-like document, or raw string."""
    try:
        if isinstance(source, (str, Path)) and Path(source).exists():
            text = Path(source).read_text(encoding="utf-8")
        elif hasattr(source, "read"):
            text = source.read()
        else:
            text = str(source)
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ParseError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    return doc


def _from_dict(cls, doc: dict, required: set[str]):
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown fields: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ParseError(f"missing required fields: {sorted(missing)}")
    return cls(**doc)


def load_workload(source) -> WorkloadSpec:
    """Read and validate a workload document (JSON, lower_snake_case fields)."""
    w = _from_dict(WorkloadSpec, _load_json_document(source), {"kernel_kind", "length_l"})
    if w.length_l < 1:
        raise ValidationError("length_l", "length_l must be >= 1")
    return w


def load_device(source) -> DeviceProfile:
    doc = _load_json_document(source)
    return _from_dict(
        DeviceProfile, doc, {"name", "bram_18k", "dsp", "ff", "lut", "clock_target_ns"}
    )


def load_directives(source) -> Directives:
    doc = _load_json_document(source)
    known = set(PARAM_FIELDS)
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"unknown fields: {sorted(unknown)}")
    missing = known - set(doc)
    if missing:
        raise ParseError(f"missing required fields: {sorted(missing)}")
    return Directives(
        buffer_depth=tuple(doc["buffer_depth"]),
        parallelism_p=tuple(doc["parallelism_p"]),
        data_width=tuple(doc["data_width"]),
    )


def enumerate_points(d: Directives) -> list[ParameterPoint]:
    """Cartesian product of the directive sets in lexicographic order
    (buffer_depth major, then parallelism_p, then data_width)."""
    return [
        ParameterPoint(depth, p, width)
        for depth, p, width in itertools.product(d.buffer_depth, d.parallelism_p, d.data_width)
    ]


def validate_point(p: ParameterPoint, w: WorkloadSpec, d: Directives) -> ValidityVerdict:
    """Check directive membership and workload coupling; reasons sorted by rule."""
    reasons = []
    for field_name in PARAM_FIELDS:
        if getattr(p, field_name) not in d.set_for(field_name):
            reasons.append(f"{field_name} not in directive set")
    if p.buffer_depth < w.length_l:
        reasons.append("buffer_depth < length_l")
    if w.length_l > 0 and p.parallelism_p > w.length_l:
        reasons.append("parallelism_p > length_l")
    reasons.sort()
    return ValidityVerdict(valid=not reasons, reasons=tuple(reasons))


def neighbor_points(p: ParameterPoint, d: Directives) -> frozenset[ParameterPoint]:
    """All points reached by moving exactly one field to an adjacent directive value."""
    out = set()
    for field_name in PARAM_FIELDS:
        values = d.set_for(field_name)
        idx = values.index(getattr(p, field_name))
        for adj in (idx - 1, idx + 1):
            if 0 <= adj < len(values):
                moved = dict(p.as_dict())
                moved[field_name] = values[adj]
                out.add(ParameterPoint(**moved))
    out.discard(p)
    return frozenset(out)
