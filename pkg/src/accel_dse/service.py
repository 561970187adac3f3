"""HTTP service exposing runs, data points, explorations, and search.

All workspace mutations route through the shared cost database and the
exploration objects; one lock file per workspace keeps writers single.
"""

from __future__ import annotations

import json
import os
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .cost_db import CostDatabase, summarize_run
from .errors import AccelDseError, MissingArtifact, UnknownMetric, UnknownPoint, ValidationError, WorkspaceLocked
from .explorer import Exploration, ExplorationConfig
from .retrieval import load_index, retrieve

LOCK_NAME = ".lock"


def acquire_lock(workspace: Path) -> Path:
    lock = workspace / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise WorkspaceLocked(f"workspace {workspace} is locked by another server") from None
    with os.fdopen(fd, "w") as fh:
        fh.write(str(os.getpid()))
    return lock


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"status": status, "code": code, "message": message}
    )


def create_app(workspace) -> FastAPI:
    workspace = Path(workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    (workspace / "runs").mkdir(exist_ok=True)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        lock = acquire_lock(workspace)
        try:
            yield
        finally:
            lock.unlink(missing_ok=True)

    app = FastAPI(lifespan=lifespan)
    db = CostDatabase(workspace)
    explorations: dict[str, Exploration] = {}

    @app.exception_handler(AccelDseError)
    async def handle_domain_error(request: Request, exc: AccelDseError):
        if isinstance(exc, UnknownPoint):
            return _error_response(404, "unknown_point", str(exc))
        if isinstance(exc, (ValidationError, UnknownMetric)):
            return _error_response(400, "invalid_request", str(exc))
        if isinstance(exc, MissingArtifact):
            return _error_response(404, "missing_artifact", str(exc))
        return _error_response(500, "internal_error", str(exc))

    def _run_folder(run_id: str) -> Path:
        folder = (workspace / "runs" / run_id).resolve()
        if workspace.resolve() not in folder.parents and folder != workspace.resolve():
            raise MissingArtifact(run_id)
        return folder

    @app.get("/api/runs")
    def list_runs():
        out = []
        runs_dir = workspace / "runs"
        for folder in sorted(runs_dir.iterdir()) if runs_dir.is_dir() else []:
            if not folder.is_dir() or not (folder / "report.json").exists():
                continue
            out.append(summarize_run(folder).to_dict())
        return out

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        folder = _run_folder(run_id)
        if not folder.is_dir():
            return _error_response(404, "unknown_run", run_id)
        summary = summarize_run(folder).to_dict()
        design = json.loads((folder / "design.json").read_text(encoding="utf-8"))
        report = json.loads((folder / "report.json").read_text(encoding="utf-8"))
        return {"summary": summary, "design": design, "report": report}

    @app.get("/api/runs/{run_id}/source")
    def get_run_source(run_id: str):
        folder = _run_folder(run_id)
        src = folder / "src"
        if not src.is_dir():
            return _error_response(404, "unknown_run", run_id)
        files = {p.name: p.read_text(encoding="utf-8") for p in sorted(src.iterdir()) if p.is_file()}
        return {"run_id": run_id, "files": files}

    @app.get("/api/datapoints")
    def list_datapoints(
        verdict: str | None = None,
        feasible: bool | None = None,
        order: str = "total_cycles",
        limit: int = 100,
    ):
        points = db.query_points(verdict=verdict, feasible=feasible, order=order, limit=limit)
        return [p.to_dict() for p in points]

    @app.post("/api/datapoints/{point_id}/verdict")
    async def post_verdict(point_id: str, request: Request):
        body = await request.json()
        verdict = body.get("verdict")
        notes = body.get("notes", "")
        if verdict not in ("accepted", "rejected"):
            return _error_response(400, "invalid_request", "verdict must be accepted or rejected")
        original = db.get(point_id)
        if original is None:
            return _error_response(404, "unknown_point", point_id)
        # idempotent under retry: an identical committed human verdict is a no-op
        existing = [
            p for p in db.query_points(order="total_cycles")
            if p.source == "human" and p.design_id == original.design_id
            and p.verdict == verdict and (p.rationale or "") == (notes or "")
        ]
        applied = False
        for exploration in explorations.values():
            if point_id in exploration.state.pending_verdicts:
                exploration.apply_verdict(point_id, verdict, notes)
                applied = True
                break
        if not applied and not existing:
            human = db.make_point(
                design_id=original.design_id,
                configuration=original.configuration,
                workload=original.workload,
                device=original.device,
                metrics=original.metrics,
                verdict=verdict,
                source="human",
                rationale=notes or None,
            )
            db.append_point(human)
        return {"point_id": point_id, "verdict": verdict, "records": len(db)}

    @app.post("/api/explorations", status_code=201)
    async def create_exploration(request: Request):
        doc = await request.json()
        cfg = ExplorationConfig.from_dict(doc, workspace)
        exploration_id = f"exp-{len(explorations) + 1:04d}"
        explorations[exploration_id] = Exploration(cfg, db=db)
        return {"exploration_id": exploration_id}

    @app.post("/api/explorations/{exploration_id}/step")
    def step_exploration(exploration_id: str):
        exploration = explorations.get(exploration_id)
        if exploration is None:
            return _error_response(404, "unknown_exploration", exploration_id)
        state = exploration.step()
        best = None
        if state.best is not None:
            best = {"point": state.best[0].as_dict(), "objective": state.best[1]}
        return {"iteration": state.iteration, "best": best}

    @app.get("/api/explorations/{exploration_id}")
    def get_exploration(exploration_id: str):
        exploration = explorations.get(exploration_id)
        if exploration is None:
            return _error_response(404, "unknown_exploration", exploration_id)
        return exploration.state.summary()

    @app.get("/api/search")
    def search(q: str = "", k: int = 10):
        idx = load_index(workspace / "index.json")
        if idx is None or not q:
            return []
        return [{"doc_id": r.doc_id, "score": r.score} for r in retrieve(idx, q, k)]

    return app


def serve(workspace, port: int) -> None:
    import uvicorn

    uvicorn.run(create_app(workspace), host="127.0.0.1", port=port)
