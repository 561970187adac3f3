"""Iterative exploration loop: propose, instantiate, evaluate, record, advise.

One Exploration object owns its state and serializes all database appends.
Run folders are laid out as runs/<iteration>-<design prefix>/ and are never
overwritten.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .advisor import AdvisorConfig, AdvisorState, advise, heuristic_advise
from .cost_db import ZERO_METRICS, CostDatabase, summarize_run
from .design_space import (
    DeviceProfile,
    Directives,
    ParameterPoint,
    WorkloadSpec,
    enumerate_points,
    load_device,
    load_directives,
    load_workload,
    validate_point,
)
from .errors import (
    AccelDseError,
    ProviderUnreachable,
    SpaceExhausted,
    UnknownPoint,
    ValidationError,
)
from .evaluator import (
    CalibrationProfile,
    EvaluationReport,
    evaluate,
    run_external_evaluator,
    shipped_vecmul_profile,
)
from .retrieval import RetrievalIndex
from .templates import compute_design_id, emit_source, get_template, instantiate

logger = logging.getLogger(__name__)

STRATEGIES = ("exhaustive", "heuristic", "llm")
CONVERGENCE_PATIENCE = 3
RECENT_POINTS_FOR_PROMPT = 10


def logical_clock():
    """Deterministic timestamp source: one tick per append, starting at epoch."""
    counter = itertools.count()
    def tick() -> str:
        return datetime.fromtimestamp(next(counter), tz=timezone.utc).isoformat()
    return tick


@dataclass
class ExplorationConfig:
    workload: WorkloadSpec
    device: DeviceProfile
    directives: Directives
    workspace: Path
    strategy: str = "exhaustive"
    max_iterations: int = 10
    candidates_per_iteration: int = 4
    diversity_k: int = 2
    seed: int = 0
    objective: str = "min_total_cycles"
    advisor: AdvisorConfig = field(default_factory=AdvisorConfig)
    profile: CalibrationProfile | None = None
    external_cmd: list | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError("strategy", f"strategy must be one of {STRATEGIES}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations", "max_iterations must be >= 1")
        if self.candidates_per_iteration < 1:
            raise ValidationError("candidates_per_iteration", "must be >= 1")
        if self.diversity_k < 0:
            raise ValidationError("diversity_k", "diversity_k must be >= 0")
        if self.objective != "min_total_cycles":
            raise ValidationError("objective", "only min_total_cycles is supported")
        self.workspace = Path(self.workspace)

    @classmethod
    def from_dict(cls, doc: dict, workspace) -> "ExplorationConfig":
        advisor_doc = doc.get("advisor") or {}
        return cls(
            workload=WorkloadSpec(**doc["workload"]),
            device=DeviceProfile(**doc["device"]),
            directives=Directives(
                buffer_depth=tuple(doc["directives"]["buffer_depth"]),
                parallelism_p=tuple(doc["directives"]["parallelism_p"]),
                data_width=tuple(doc["directives"]["data_width"]),
            ),
            workspace=Path(workspace),
            strategy=doc.get("strategy", "exhaustive"),
            max_iterations=doc.get("max_iterations", 10),
            candidates_per_iteration=doc.get("candidates_per_iteration", 4),
            diversity_k=doc.get("diversity_k", 2),
            seed=doc.get("seed", 0),
            advisor=AdvisorConfig(**advisor_doc),
        )


@dataclass
class EvaluatedEntry:
    point: ParameterPoint
    design_id: str
    point_id: str
    objective: float
    feasible: bool
    verdict: str = "pending"


@dataclass
class ExplorationState:
    iteration: int = 0
    evaluated_ids: set = field(default_factory=set)
    entries: list = field(default_factory=list)  # EvaluatedEntry, in evaluation order
    best: tuple | None = None  # (point, objective)
    pending_verdicts: list = field(default_factory=list)
    rejected_points: set = field(default_factory=set)  # human-rejected ParameterPoints
    no_improve: int = 0
    fallback_iterations: list = field(default_factory=list)
    exhausted: bool = False

    def frontier(self) -> list:
        """Feasible, not human-rejected entries sorted by objective then point."""
        rows = [
            e for e in self.entries
            if e.feasible and e.point not in self.rejected_points and e.verdict != "rejected"
        ]
        rows.sort(key=lambda e: (e.objective, e.point))
        return rows

    def summary(self) -> dict:
        best = None
        if self.best is not None:
            best = {"point": self.best[0].as_dict(), "objective": self.best[1]}
        return {
            "iteration": self.iteration,
            "evaluated": len(self.entries),
            "best": best,
            "pending_verdicts": list(self.pending_verdicts),
            "frontier": [
                {"point": e.point.as_dict(), "objective": e.objective}
                for e in self.frontier()
            ],
        }


class Exploration:
    def __init__(self, cfg: ExplorationConfig, db: CostDatabase | None = None,
                 index: RetrievalIndex | None = None):
        self.cfg = cfg
        self.workspace = cfg.workspace
        self.workspace.mkdir(parents=True, exist_ok=True)
        (self.workspace / "runs").mkdir(exist_ok=True)
        self.db = db if db is not None else CostDatabase(self.workspace, clock=logical_clock())
        self.index = index
        self.profile = cfg.profile or shipped_vecmul_profile()
        self.state = ExplorationState()
        self.template = get_template(cfg.workload.kernel_kind)

    # ---- candidate proposal -------------------------------------------------

    def _advisor_state(self) -> AdvisorState:
        recent = [self.db.get(e.point_id) for e in self.state.entries[-RECENT_POINTS_FOR_PROMPT:]]
        best_point = self.state.best[0] if self.state.best else None
        return AdvisorState(
            workload=self.cfg.workload,
            device=self.cfg.device,
            directives=self.cfg.directives,
            data_points=[p for p in recent if p is not None],
            evaluated_points={e.point for e in self.state.entries} | self.state.rejected_points,
            best_point=best_point if best_point not in self.state.rejected_points else None,
        )

    def _propose(self) -> list:
        cfg = self.cfg
        if cfg.strategy == "exhaustive":
            fresh = []
            for point in enumerate_points(cfg.directives):
                if not validate_point(point, cfg.workload, cfg.directives).valid:
                    continue
                if compute_design_id(self.template.template_id, point, cfg.workload) in self.state.evaluated_ids:
                    continue
                fresh.append(point)
                if len(fresh) >= cfg.candidates_per_iteration:
                    break
            if not fresh:
                raise SpaceExhausted("exhaustive enumeration complete")
            return fresh

        advisor_state = self._advisor_state()
        if cfg.strategy == "heuristic":
            proposal = heuristic_advise(advisor_state, seed=cfg.seed + self.state.iteration)
            return [c.point for c in proposal.candidates[: cfg.candidates_per_iteration]]

        # llm strategy
        try:
            exchange = advise(advisor_state, cfg.advisor, index=self.index)
        except ProviderUnreachable:
            logger.warning("provider unreachable at iteration %d; heuristic fallback",
                           self.state.iteration)
            self.state.fallback_iterations.append(self.state.iteration)
            proposal = heuristic_advise(advisor_state, seed=cfg.seed + self.state.iteration)
            return [c.point for c in proposal.candidates[: cfg.candidates_per_iteration]]

        self._persist_transcript(exchange)
        for rej in exchange.outcome.rejected:
            self._record_rejected(rej.point, "; ".join(rej.reasons))
        points = []
        for cand in exchange.outcome.accepted:
            if cand.action == "reject":
                self._record_rejected(cand.point, "advisor rejected the candidate")
            else:
                points.append(cand.point)
        return points[: cfg.candidates_per_iteration]

    def _persist_transcript(self, exchange) -> None:
        folder = self.workspace / "runs" / f"{self.state.iteration:04d}-advisor"
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "prompt.txt").write_text(exchange.prompt_text, encoding="utf-8")
        (folder / "reply.txt").write_text(exchange.reply_text, encoding="utf-8")

    # ---- recording ----------------------------------------------------------

    def _record_rejected(self, point: ParameterPoint, reason: str) -> str:
        design_id = compute_design_id(self.template.template_id, point, self.cfg.workload)
        record = self.db.make_point(
            design_id=design_id,
            configuration=point,
            workload=self.cfg.workload,
            device=self.cfg.device.name,
            metrics=dict(ZERO_METRICS),
            verdict="rejected",
            source="analytical",
            rationale=reason,
        )
        return self.db.append_point(record)

    def _evaluate_candidate(self, point: ParameterPoint) -> None:
        from .templates import design_to_dict  # local to avoid cycle noise

        state = self.state
        design = instantiate(self.template, point, self.cfg.workload)
        if design.design_id in state.evaluated_ids:
            return
        run_id = f"{state.iteration:04d}-{design.design_id[:12]}"
        run_folder = self.workspace / "runs" / run_id
        if run_folder.exists():
            return
        src_dir = run_folder / "src"
        src_dir.mkdir(parents=True)
        for rel, text in emit_source(design).files.items():
            (src_dir / rel).write_text(text, encoding="utf-8")
        (run_folder / "design.json").write_text(
            json.dumps(design_to_dict(design), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

        source = "analytical"
        try:
            if self.cfg.external_cmd:
                source = "external"
                report = run_external_evaluator(self.cfg.external_cmd, design, run_folder)
            else:
                report = evaluate(design, self.cfg.device, self.profile)
        except AccelDseError as exc:
            record = self.db.make_point(
                design_id=design.design_id,
                configuration=point,
                workload=self.cfg.workload,
                device=self.cfg.device.name,
                metrics=dict(ZERO_METRICS),
                verdict="failed",
                source=source,
                rationale=str(exc),
            )
            self.db.append_point(record)
            state.evaluated_ids.add(design.design_id)
            state.entries.append(
                EvaluatedEntry(point, design.design_id, record.point_id,
                               float("inf"), False, verdict="failed")
            )
            return

        (run_folder / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        summary = summarize_run(run_folder)
        (run_folder / "summary.json").write_text(
            json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        metrics = {
            "total_cycles": report.total_cycles,
            "wall_time_ns": report.wall_time_ns,
            "resources": report.resources,
            "utilization_pct": report.utilization_pct,
            "timing_pass": report.timing_pass,
            "feasible": report.feasible,
        }
        record = self.db.make_point(
            design_id=design.design_id,
            configuration=point,
            workload=self.cfg.workload,
            device=self.cfg.device.name,
            metrics=metrics,
            verdict="pending",
            source=source,
        )
        self.db.append_point(record)
        state.evaluated_ids.add(design.design_id)
        state.pending_verdicts.append(record.point_id)
        state.entries.append(
            EvaluatedEntry(point, design.design_id, record.point_id,
                           report.objective, report.feasible)
        )

    def _recompute_best(self) -> None:
        frontier = self.state.frontier()
        self.state.best = (frontier[0].point, frontier[0].objective) if frontier else None

    # ---- loop ---------------------------------------------------------------

    def step(self) -> ExplorationState:
        state = self.state
        before = state.best[1] if state.best else float("inf")
        points = self._propose()
        seen: set[ParameterPoint] = set()
        for point in points:
            if point in seen or point in state.rejected_points:
                continue
            seen.add(point)
            self._evaluate_candidate(point)
        self._recompute_best()
        after = state.best[1] if state.best else float("inf")
        state.no_improve = 0 if after < before else state.no_improve + 1
        state.iteration += 1
        return state

    def run(self) -> dict:
        stopped_reason = "max_iterations"
        while self.state.iteration < self.cfg.max_iterations:
            try:
                self.step()
            except SpaceExhausted:
                stopped_reason = "space_exhausted"
                self.state.exhausted = True
                break
            if self.state.no_improve >= CONVERGENCE_PATIENCE:
                stopped_reason = "converged"
                break
        report = {
            "strategy": self.cfg.strategy,
            "seed": self.cfg.seed,
            "iterations": self.state.iteration,
            "evaluations": len(self.state.entries),
            "best": None
            if self.state.best is None
            else {"point": self.state.best[0].as_dict(), "objective": self.state.best[1]},
            "stopped_reason": stopped_reason,
            "fallback_iterations": self.state.fallback_iterations,
        }
        (self.workspace / "exploration_report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return report

    # ---- frontier & verdicts -------------------------------------------------

    def select_frontier(self) -> list:
        """Top points by objective plus greedy farthest-point diversity picks.

        Distance is L1 over directive-set index positions, each axis divided
        by its set size.
        """
        cfg = self.cfg
        ranked = sorted(self.state.entries, key=lambda e: (e.objective, e.point))
        selected = [e.point for e in ranked[: cfg.candidates_per_iteration]]
        pool = [e.point for e in ranked[cfg.candidates_per_iteration:]]

        def dist(a: ParameterPoint, b: ParameterPoint) -> float:
            total = 0.0
            for field_name in ("buffer_depth", "parallelism_p", "data_width"):
                values = cfg.directives.set_for(field_name)
                ia = values.index(getattr(a, field_name))
                ib = values.index(getattr(b, field_name))
                total += abs(ia - ib) / len(values)
            return total

        for _ in range(cfg.diversity_k):
            if not pool:
                break
            if not selected:
                pick = sorted(pool)[0]
            else:
                # maximize the minimum distance to the selected set; ties go to
                # the lexicographically smaller point
                pick, best_score = None, None
                for p in sorted(pool):
                    score = min(dist(p, s) for s in selected)
                    if best_score is None or score > best_score:
                        pick, best_score = p, score
            selected.append(pick)
            pool.remove(pick)
        return selected

    def apply_verdict(self, point_id: str, verdict: str, notes: str = "") -> ExplorationState:
        if verdict not in ("accepted", "rejected"):
            raise ValidationError("verdict", "verdict must be accepted or rejected")
        if point_id not in self.state.pending_verdicts:
            raise UnknownPoint(point_id)
        original = self.db.get(point_id)
        if original is None:
            raise UnknownPoint(point_id)
        human = self.db.make_point(
            design_id=original.design_id,
            configuration=original.configuration,
            workload=original.workload,
            device=original.device,
            metrics=original.metrics,
            verdict=verdict,
            source="human",
            rationale=notes or None,
        )
        self.db.append_point(human)
        self.state.pending_verdicts.remove(point_id)
        for entry in self.state.entries:
            if entry.point_id == point_id:
                entry.verdict = verdict
                if verdict == "rejected":
                    self.state.rejected_points.add(entry.point)
        self._recompute_best()
        return self.state


def run_exploration(cfg: ExplorationConfig, db: CostDatabase | None = None,
                    index: RetrievalIndex | None = None) -> tuple[ExplorationState, dict]:
    exploration = Exploration(cfg, db=db, index=index)
    report = exploration.run()
    return exploration.state, report


def load_exploration_config(
    workload_path, device_path, directives_path, workspace, **kwargs
) -> ExplorationConfig:
    return ExplorationConfig(
        workload=load_workload(workload_path),
        device=load_device(device_path),
        directives=load_directives(directives_path),
        workspace=Path(workspace),
        **kwargs,
    )
