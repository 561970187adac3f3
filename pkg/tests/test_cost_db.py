import json

import pytest
from hypothesis import given, settings, strategies as st

from accel_dse.cost_db import (
    ZERO_METRICS,
    CostDatabase,
    export_finetune_dataset,
    summarize_run,
)
from accel_dse.design_space import ParameterPoint, WorkloadSpec
from accel_dse.errors import DuplicatePoint, MissingArtifact, UnknownMetric


def metrics(cycles, feasible=True):
    m = dict(ZERO_METRICS)
    m["total_cycles"] = cycles
    m["wall_time_ns"] = cycles * 5.0
    m["feasible"] = feasible
    m["timing_pass"] = feasible
    return m


def add(db, design_id, cycles, feasible=True, verdict="pending", source="analytical", rationale=None):
    point = db.make_point(
        design_id=design_id,
        configuration=ParameterPoint(1024, 1, 32),
        workload=WorkloadSpec("vecmul", 1023, 32, name="vecmul-1023"),
        device="xc7z020",
        metrics=metrics(cycles, feasible),
        verdict=verdict,
        source=source,
        rationale=rationale,
    )
    db.append_point(point)
    return point


class TestAppend:
    def test_count_increments(self, tmp_path):
        db = CostDatabase(tmp_path)
        assert len(db) == 0
        add(db, "d1", 2060)
        assert len(db) == 1

    def test_duplicate_point_id(self, tmp_path):
        db = CostDatabase(tmp_path)
        point = add(db, "d1", 2060)
        with pytest.raises(DuplicatePoint):
            db.append_point(point)

    def test_rejected_point_retrievable(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 0, feasible=False, verdict="rejected", rationale="out of bounds")
        got = db.query_points(verdict="rejected")
        assert len(got) == 1 and got[0].rationale == "out of bounds"

    def test_append_preserves_prior_bytes(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060)
        before = db.path.read_bytes()
        add(db, "d2", 1040)
        after = db.path.read_bytes()
        assert after[: len(before)] == before

    def test_reload_round_trip(self, tmp_path):
        db = CostDatabase(tmp_path)
        a = add(db, "d1", 2060)
        b = add(db, "d2", 1040)
        reopened = CostDatabase(tmp_path)
        assert {p.point_id for p in reopened.query_points()} == {a.point_id, b.point_id}

    def test_torn_final_line_ignored(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060)
        with db.path.open("a") as fh:
            fh.write('{"point_id": "torn"')  # no newline, partial json
        reopened = CostDatabase(tmp_path)
        assert len(reopened) == 1


class TestQuery:
    def test_empty(self, tmp_path):
        db = CostDatabase(tmp_path)
        assert db.query_points(verdict="accepted") == []

    def test_order_and_limit(self, tmp_path):
        db = CostDatabase(tmp_path)
        a = add(db, "d1", 2060)
        b = add(db, "d2", 1040)
        add(db, "d3", 0, feasible=False)  # sorts as +inf
        got = db.query_points(order="total_cycles", limit=2)
        assert [p.point_id for p in got] == [b.point_id, a.point_id]

    def test_verdict_filter(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060, verdict="rejected", feasible=False)
        add(db, "d2", 1040)
        got = db.query_points(verdict="rejected")
        assert [p.verdict for p in got] == ["rejected"]

    def test_unknown_metric(self, tmp_path):
        db = CostDatabase(tmp_path)
        with pytest.raises(UnknownMetric):
            db.query_points(order="power_mw")

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=10_000), min_size=0, max_size=12))
    def test_every_point_returned_once(self, cycles_list):
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            db = CostDatabase(tmp)
            ids = [add(db, f"d{i}", c).point_id for i, c in enumerate(cycles_list)]
            got = db.query_points()
            assert sorted(p.point_id for p in got) == sorted(ids)


class TestSummarizeRun:
    def _run_folder(self, tmp_path):
        folder = tmp_path / "0000-abc"
        (folder / "src").mkdir(parents=True)
        (folder / "src" / "accelerator.sc").write_text("// src")
        (folder / "design.json").write_text(json.dumps({"design_id": "abc"}))
        (folder / "report.json").write_text(
            json.dumps(
                {
                    "total_cycles": 2060,
                    "utilization_pct": {"bram_18k": 2, "dsp": 1, "ff": 0, "lut": 2},
                    "feasible": True,
                }
            )
        )
        return folder

    def test_headline_metrics(self, tmp_path):
        summary = summarize_run(self._run_folder(tmp_path))
        assert summary.total_cycles == 2060
        assert summary.utilization_pct["bram_18k"] == 2

    def test_missing_report(self, tmp_path):
        folder = self._run_folder(tmp_path)
        (folder / "report.json").unlink()
        with pytest.raises(MissingArtifact) as exc:
            summarize_run(folder)
        assert exc.value.artifact == "report.json"

    def test_deterministic(self, tmp_path):
        folder = self._run_folder(tmp_path)
        assert summarize_run(folder) == summarize_run(folder)


class TestExport:
    def test_count_matches_lines(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060)
        add(db, "d2", 1040)
        out = tmp_path / "dataset.ndjson"
        count = export_finetune_dataset(db, {}, out)
        lines = out.read_text().splitlines()
        assert count == 2 and len(lines) == 2

    def test_empty_filter_result(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060)
        out = tmp_path / "dataset.ndjson"
        assert export_finetune_dataset(db, {"verdict": "accepted"}, out) == 0
        assert out.read_text() == ""

    def test_record_schema(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060, verdict="accepted")
        out = tmp_path / "dataset.ndjson"
        export_finetune_dataset(db, {}, out)
        record = json.loads(out.read_text().splitlines()[0])
        assert set(record) == {"configuration", "workload", "device", "feedback", "verdict", "rationale"}
        assert set(record["feedback"]) == {"simulation_success", "latency_cycles", "resource_utilization"}
        assert record["feedback"]["simulation_success"] is True
        assert record["feedback"]["latency_cycles"] == 2060

    def test_export_count_equals_query_count(self, tmp_path):
        db = CostDatabase(tmp_path)
        add(db, "d1", 2060, verdict="rejected", feasible=False)
        add(db, "d2", 1040)
        add(db, "d3", 900, verdict="rejected", feasible=False)
        out = tmp_path / "dataset.ndjson"
        count = export_finetune_dataset(db, {"verdict": "rejected"}, out)
        assert count == len(db.query_points(verdict="rejected"))
