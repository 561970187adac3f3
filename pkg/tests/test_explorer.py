import json
import math

import pytest

from accel_dse.advisor import AdvisorConfig
from accel_dse.design_space import (
    DeviceProfile,
    Directives,
    ParameterPoint,
    WorkloadSpec,
    enumerate_points,
    validate_point,
)
from accel_dse.errors import UnknownPoint
from accel_dse.evaluator import evaluate, shipped_vecmul_profile
from accel_dse.explorer import Exploration, ExplorationConfig, run_exploration
from accel_dse.templates import builtin_vecmul_template, instantiate


def make_cfg(tmp_path, directives, workload=None, **kwargs):
    workload = workload or WorkloadSpec("vecmul", 1023, 32, name="vecmul-1023")
    device = DeviceProfile("xc7z020-clg400-1", 280, 220, 106400, 53200, 5.0)
    return ExplorationConfig(
        workload=workload, device=device, directives=directives,
        workspace=tmp_path, **kwargs,
    )


def brute_force_best(directives, workload, device):
    """Independent argmin over the full directive space."""
    template = builtin_vecmul_template()
    profile = shipped_vecmul_profile()
    best = None
    for point in enumerate_points(directives):
        if not validate_point(point, workload, directives).valid:
            continue
        report = evaluate(instantiate(template, point, workload), device, profile)
        key = (report.objective, point)
        if best is None or key < best:
            best = key
    return best


class TestExhaustive:
    def test_two_point_space(self, tmp_path):
        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", max_iterations=5)
        state, report = run_exploration(cfg)
        assert len(state.entries) == 2
        assert report["best"]["point"] == {"buffer_depth": 1024, "parallelism_p": 1, "data_width": 32}
        assert report["best"]["objective"] == 2060

    def test_oracle_equivalence(self, tmp_path):
        d = Directives((1024, 2048, 4096), (1, 2, 4, 8), (8, 16, 32))  # 36 points
        workload = WorkloadSpec("vecmul", 1023, 32, name="vecmul-1023")
        device = DeviceProfile("xc7z020-clg400-1", 280, 220, 106400, 53200, 5.0)
        cfg = make_cfg(tmp_path, d, workload=workload, strategy="exhaustive",
                       max_iterations=50, candidates_per_iteration=6)
        state, report = run_exploration(cfg)
        objective, point = brute_force_best(d, workload, device)
        assert report["best"]["objective"] == objective
        assert report["best"]["point"] == point.as_dict()

    def test_run_folders_and_records(self, tmp_path):
        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", max_iterations=5)
        state, _ = run_exploration(cfg)
        run_dirs = sorted((tmp_path / "runs").iterdir())
        assert len(run_dirs) == 2
        for folder in run_dirs:
            assert (folder / "design.json").exists()
            assert (folder / "report.json").exists()
            assert (folder / "summary.json").exists()
            assert (folder / "src" / "accelerator.sc").exists()
        assert len((tmp_path / "db" / "datapoints.ndjson").read_text().splitlines()) == 2


class TestReproducibility:
    def test_heuristic_runs_byte_identical(self, tmp_path):
        d = Directives((1024, 2048, 4096), (1, 2, 4), (32,))
        outputs = []
        for name in ("a", "b"):
            ws = tmp_path / name
            cfg = make_cfg(ws, d, strategy="heuristic", max_iterations=6, seed=42)
            run_exploration(cfg)
            outputs.append(
                (
                    (ws / "exploration_report.json").read_bytes(),
                    (ws / "db" / "datapoints.ndjson").read_bytes(),
                )
            )
        assert outputs[0] == outputs[1]

    def test_exhaustive_deterministic_trace(self, tmp_path):
        d = Directives((1024, 2048), (1, 2), (32,))
        traces = []
        for name in ("a", "b"):
            cfg = make_cfg(tmp_path / name, d, strategy="exhaustive", max_iterations=5, seed=7)
            state, _ = run_exploration(cfg)
            traces.append([(e.point, e.objective) for e in state.entries])
        assert traces[0] == traces[1]


class TestStep:
    def test_best_updates(self, tmp_path):
        d = Directives((1024, 2048), (1, 2), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", max_iterations=10,
                       candidates_per_iteration=1)
        exploration = Exploration(cfg)
        exploration.step()
        first_best = exploration.state.best
        assert first_best is not None
        exploration.step()
        assert exploration.state.best[1] <= first_best[1]

    def test_dedup_by_design_id(self, tmp_path):
        d = Directives((1024,), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", max_iterations=5)
        exploration = Exploration(cfg)
        exploration.step()
        assert len(exploration.state.entries) == 1
        exploration._evaluate_candidate(ParameterPoint(1024, 1, 32))  # already evaluated
        assert len(exploration.state.entries) == 1

    def test_infeasible_points_keep_best_unchanged(self, tmp_path):
        d = Directives((1024, 32768), (1,), (32,))
        workload = WorkloadSpec("vecmul", 1023, 32, name="w")
        device = DeviceProfile("small", 6, 220, 106400, 53200, 5.0)  # 32768-deep buffers blow BRAM
        cfg = ExplorationConfig(workload=workload, device=device, directives=d,
                                workspace=tmp_path, strategy="exhaustive",
                                max_iterations=5, candidates_per_iteration=2)
        state, report = run_exploration(cfg)
        infeasible = [e for e in state.entries if not e.feasible]
        assert infeasible and all(math.isinf(e.objective) for e in infeasible)
        assert report["best"]["point"]["buffer_depth"] == 1024

    def test_monotone_best(self, tmp_path):
        d = Directives((1024, 2048, 4096), (1, 2, 4), (32,))
        cfg = make_cfg(tmp_path, d, strategy="heuristic", max_iterations=8, seed=1,
                       candidates_per_iteration=2)
        exploration = Exploration(cfg)
        objectives = []
        for _ in range(6):
            try:
                exploration.step()
            except Exception:
                break
            if exploration.state.best:
                objectives.append(exploration.state.best[1])
        assert objectives == sorted(objectives, reverse=True)


class TestLlmStrategy:
    def test_out_of_bounds_stub_logs_rejections(self, tmp_path, monkeypatch):
        from accel_dse import explorer as explorer_mod
        from accel_dse.advisor import AdvisorExchange, ParseOutcome, RejectedCandidate

        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="llm", max_iterations=10,
                       advisor=AdvisorConfig(provider="remote_chat", endpoint_url="http://stub"))
        rejected = (
            RejectedCandidate(ParameterPoint(8192, 1, 32), "refine",
                              ("buffer_depth not in directive set",)),
            RejectedCandidate(ParameterPoint(16384, 1, 32), "refine",
                              ("buffer_depth not in directive set",)),
        )

        def fake_advise(state, cfg, index=None):
            return AdvisorExchange(
                outcome=ParseOutcome(accepted=(), rejected=rejected, rationale="stub"),
                prompt_text="p", reply_text="r",
            )

        monkeypatch.setattr(explorer_mod, "advise", fake_advise)
        state, report = run_exploration(cfg)
        assert len(state.entries) == 0
        exploration_db = Exploration(make_cfg(tmp_path, d)).db  # reopen same workspace db
        rejected_records = exploration_db.query_points(verdict="rejected")
        assert len(rejected_records) == 2 * state.iteration
        assert report["stopped_reason"] == "converged"
        assert report["best"] is None

    def test_fallback_on_unreachable_provider(self, tmp_path):
        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="llm", max_iterations=2,
                       advisor=AdvisorConfig(provider="remote_chat",
                                             endpoint_url="http://127.0.0.1:1",
                                             request_timeout_s=1))
        state, report = run_exploration(cfg)
        assert report["fallback_iterations"]
        assert len(state.entries) >= 1


class TestSelectFrontier:
    def test_single_point_no_diversity(self, tmp_path):
        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", diversity_k=0,
                       candidates_per_iteration=1, max_iterations=1)
        exploration = Exploration(cfg)
        exploration.step()
        assert exploration.select_frontier() == [ParameterPoint(1024, 1, 32)]

    def test_greedy_farthest_point_hand_checked(self, tmp_path):
        # 3x2 space; evaluated at indices (0,0), (2,0), (1,1); top-1 = (0,0).
        # distances to (0,0): (2,0) -> 2/3, (1,1) -> 1/3 + 1/2 = 5/6 -> picks (1,1)
        d = Directives((100, 200, 300), (1, 2), (32,))
        w = WorkloadSpec("vecmul", 1, 32, name="w")
        cfg = ExplorationConfig(
            workload=w, device=DeviceProfile("d", 280, 220, 106400, 53200, 5.0),
            directives=d, workspace=tmp_path, strategy="exhaustive",
            candidates_per_iteration=1, diversity_k=1,
        )
        exploration = Exploration(cfg)
        from accel_dse.explorer import EvaluatedEntry

        def entry(depth, par, cycles):
            return EvaluatedEntry(ParameterPoint(depth, par, 32), f"id{depth}{par}",
                                  f"pid{depth}{par}", float(cycles), True)

        exploration.state.entries = [entry(100, 1, 10), entry(300, 1, 20), entry(200, 2, 30)]
        selected = exploration.select_frontier()
        assert selected == [ParameterPoint(100, 1, 32), ParameterPoint(200, 2, 32)]

    def test_diversity_k_covers_all(self, tmp_path):
        d = Directives((1024, 2048), (1,), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", diversity_k=10,
                       candidates_per_iteration=1, max_iterations=5)
        exploration = Exploration(cfg)
        exploration.step()
        exploration.step()
        assert len(exploration.select_frontier()) == len(exploration.state.entries)


class TestVerdicts:
    def _explored(self, tmp_path):
        d = Directives((1024, 2048), (1, 2), (32,))
        cfg = make_cfg(tmp_path, d, strategy="exhaustive", max_iterations=5)
        exploration = Exploration(cfg)
        exploration.run()
        return exploration

    def test_accept_shrinks_pending(self, tmp_path):
        exploration = self._explored(tmp_path)
        pending = list(exploration.state.pending_verdicts)
        exploration.apply_verdict(pending[0], "accepted", "looks good")
        assert len(exploration.state.pending_verdicts) == len(pending) - 1

    def test_reject_best_recomputes(self, tmp_path):
        exploration = self._explored(tmp_path)
        best_point = exploration.state.best[0]
        best_entry = next(e for e in exploration.state.entries if e.point == best_point)
        before = exploration.state.best[1]
        exploration.apply_verdict(best_entry.point_id, "rejected", "failed on hardware")
        assert exploration.state.best is None or exploration.state.best[0] != best_point
        if exploration.state.best:
            assert exploration.state.best[1] >= before

    def test_unknown_point(self, tmp_path):
        exploration = self._explored(tmp_path)
        with pytest.raises(UnknownPoint):
            exploration.apply_verdict("nope", "accepted", "")

    def test_human_record_appended_not_mutated(self, tmp_path):
        exploration = self._explored(tmp_path)
        pending = exploration.state.pending_verdicts[0]
        count_before = len(exploration.db)
        exploration.apply_verdict(pending, "accepted", "ok")
        assert len(exploration.db) == count_before + 1
        human = [p for p in exploration.db.query_points() if p.source == "human"]
        assert len(human) == 1 and human[0].verdict == "accepted"
