"""Append-only hardware data point store over a newline-delimited JSON file.

Single writer per workspace; records are immutable once written. A torn
final line (partial write) is detected at open and skipped with a warning.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .design_space import ParameterPoint, WorkloadSpec
from .errors import DuplicatePoint, MissingArtifact, StorageError, UnknownMetric

logger = logging.getLogger(__name__)

VERDICTS = ("accepted", "rejected", "failed", "pending")
SOURCES = ("analytical", "external", "human")
ORDER_METRICS = ("total_cycles", "wall_time_ns")

ZERO_METRICS = {
    "total_cycles": 0,
    "wall_time_ns": 0.0,
    "resources": {"bram_18k": 0, "dsp": 0, "ff": 0, "lut": 0},
    "utilization_pct": {"bram_18k": 0, "dsp": 0, "ff": 0, "lut": 0},
    "timing_pass": False,
    "feasible": False,
}


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class HardwareDataPoint:
    point_id: str
    design_id: str
    configuration: ParameterPoint
    workload: WorkloadSpec
    device: str
    metrics: dict  # total_cycles, wall_time_ns, resources, utilization_pct, timing_pass, feasible
    verdict: str
    source: str
    rationale: str | None
    created_at: str

    def to_dict(self) -> dict:
        return {
            "point_id": self.point_id,
            "design_id": self.design_id,
            "configuration": self.configuration.as_dict(),
            "workload": {
                "kernel_kind": self.workload.kernel_kind,
                "length_l": self.workload.length_l,
                "data_width": self.workload.data_width,
                "name": self.workload.name,
            },
            "device": self.device,
            "metrics": self.metrics,
            "verdict": self.verdict,
            "source": self.source,
            "rationale": self.rationale,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HardwareDataPoint":
        return cls(
            point_id=doc["point_id"],
            design_id=doc["design_id"],
            configuration=ParameterPoint(**doc["configuration"]),
            workload=WorkloadSpec(**doc["workload"]),
            device=doc["device"],
            metrics=doc["metrics"],
            verdict=doc["verdict"],
            source=doc["source"],
            rationale=doc.get("rationale"),
            created_at=doc["created_at"],
        )


@dataclass(frozen=True)
class RunSummary:
    run_id: str
    design_id: str
    total_cycles: int
    utilization_pct: dict
    feasible: bool
    source_files: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "design_id": self.design_id,
            "total_cycles": self.total_cycles,
            "utilization_pct": dict(self.utilization_pct),
            "feasible": self.feasible,
            "source_files": list(self.source_files),
        }


class CostDatabase:
    """Append-only store at <workspace>/db/datapoints.ndjson with an in-memory index."""

    def __init__(self, workspace, clock=utc_now_iso):
        self.workspace = Path(workspace)
        self.path = self.workspace / "db" / "datapoints.ndjson"
        self.clock = clock
        self._points: dict[str, HardwareDataPoint] = {}
        self._order: list[str] = []
        self._seq: dict[tuple[str, str], int] = {}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        try:
            raw = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot read {self.path}: {exc}") from exc
        lines = raw.split("\n")
        torn = lines and lines[-1] != ""  # no trailing newline on the final record
        if lines and lines[-1] == "":
            lines = lines[:-1]
        for i, line in enumerate(lines):
            try:
                doc = json.loads(line)
                point = HardwareDataPoint.from_dict(doc)
            except (ValueError, KeyError, TypeError) as exc:
                if i == len(lines) - 1 and torn:
                    logger.warning("ignoring torn final line in %s", self.path)
                    continue
                raise StorageError(f"corrupt record at line {i + 1} of {self.path}: {exc}") from exc
            if i == len(lines) - 1 and torn:
                # parsed fine but never committed with a newline; treat as torn
                logger.warning("ignoring final record without newline in %s", self.path)
                continue
            self._index(point)

    def _index(self, point: HardwareDataPoint) -> None:
        self._points[point.point_id] = point
        self._order.append(point.point_id)
        key = (point.design_id, point.source)
        self._seq[key] = max(self._seq.get(key, 0), self._seq_of(point.point_id))

    @staticmethod
    def _seq_of(point_id: str) -> int:
        tail = point_id.rsplit("-", 1)[-1]
        return int(tail) if tail.isdigit() else 0

    def __len__(self) -> int:
        return len(self._points)

    def next_point_id(self, design_id: str, source: str) -> str:
        seq = self._seq.get((design_id, source), 0) + 1
        return f"{design_id[:16]}-{source}-{seq:04d}"

    def make_point(
        self,
        design_id: str,
        configuration: ParameterPoint,
        workload: WorkloadSpec,
        device: str,
        metrics: dict,
        verdict: str,
        source: str,
        rationale: str | None = None,
    ) -> HardwareDataPoint:
        """Build a point with a fresh sequenced id and the database clock."""
        return HardwareDataPoint(
            point_id=self.next_point_id(design_id, source),
            design_id=design_id,
            configuration=configuration,
            workload=workload,
            device=device,
            metrics=metrics,
            verdict=verdict,
            source=source,
            rationale=rationale,
            created_at=self.clock(),
        )

    def append_point(self, p: HardwareDataPoint) -> str:
        if p.verdict not in VERDICTS:
            raise StorageError(f"unknown verdict {p.verdict!r}")
        if p.source not in SOURCES:
            raise StorageError(f"unknown source {p.source!r}")
        if p.point_id in self._points:
            raise DuplicatePoint(p.point_id)
        line = json.dumps(p.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        try:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
        except OSError as exc:
            raise StorageError(f"append failed: {exc}") from exc
        self._index(p)
        return p.point_id

    def query_points(
        self,
        workload: str | None = None,
        device: str | None = None,
        verdict: str | None = None,
        feasible: bool | None = None,
        order: str = "total_cycles",
        limit: int | None = None,
    ) -> list[HardwareDataPoint]:
        """Filtered query, ascending by the order metric, ties by point_id.

        Infeasible points sort with a +inf key so they always trail feasible
        ones regardless of their recorded raw metric.
        """
        if order not in ORDER_METRICS:
            raise UnknownMetric(order)
        if limit is not None and limit < 0:
            raise UnknownMetric(f"limit must be >= 0, got {limit}")
        out = []
        for pid in self._order:
            p = self._points[pid]
            if workload is not None and p.workload.name != workload:
                continue
            if device is not None and p.device != device:
                continue
            if verdict is not None and p.verdict != verdict:
                continue
            if feasible is not None and bool(p.metrics.get("feasible")) != feasible:
                continue
            out.append(p)

        def key(p: HardwareDataPoint):
            value = p.metrics.get(order, 0)
            if not p.metrics.get("feasible"):
                value = math.inf
            return (value, p.point_id)

        out.sort(key=key)
        return out if limit is None else out[:limit]

    def get(self, point_id: str) -> HardwareDataPoint | None:
        return self._points.get(point_id)


def summarize_run(run_folder) -> RunSummary:
    """Deterministic summary of a run folder's design and report documents."""
    run_folder = Path(run_folder)
    design_path = run_folder / "design.json"
    report_path = run_folder / "report.json"
    if not design_path.exists():
        raise MissingArtifact("design.json")
    if not report_path.exists():
        raise MissingArtifact("report.json")
    design = json.loads(design_path.read_text(encoding="utf-8"))
    report = json.loads(report_path.read_text(encoding="utf-8"))
    src_dir = run_folder / "src"
    files = tuple(sorted(p.name for p in src_dir.iterdir() if p.is_file())) if src_dir.is_dir() else ()
    return RunSummary(
        run_id=run_folder.name,
        design_id=design["design_id"],
        total_cycles=report["total_cycles"],
        utilization_pct=report["utilization_pct"],
        feasible=report["feasible"],
        source_files=files,
    )


def export_finetune_dataset(db: CostDatabase, filter: dict | None, out) -> int:
    """Write one training record per matching point; returns the line count.

    Record fields: configuration, workload, device,
    feedback {simulation_success, latency_cycles, resource_utilization},
    verdict, rationale.
    """
    filter = filter or {}
    points = db.query_points(
        workload=filter.get("workload"),
        device=filter.get("device"),
        verdict=filter.get("verdict"),
        feasible=filter.get("feasible"),
    )
    out = Path(out)
    try:
        with out.open("w", encoding="utf-8") as fh:
            for p in points:
                record = {
                    "configuration": p.configuration.as_dict(),
                    "workload": p.to_dict()["workload"],
                    "device": p.device,
                    "feedback": {
                        "simulation_success": p.verdict != "failed" and bool(p.metrics.get("feasible")),
                        "latency_cycles": p.metrics.get("total_cycles", 0),
                        "resource_utilization": p.metrics.get("utilization_pct", {}),
                    },
                    "verdict": p.verdict,
                    "rationale": p.rationale,
                }
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    except OSError as exc:
        raise StorageError(f"export failed: {exc}") from exc
    return len(points)
