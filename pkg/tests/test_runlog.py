import pytest

from parbo.config import config_to_dict, default_config_dict, config_from_dict
from parbo.runlog import (
    InvariantViolation,
    LogFormatError,
    RunLog,
    snapshot_hash,
    verify_run_invariants,
    write_summary_csv,
)


def fresh_log(m=2):
    raw = default_config_dict(2)
    raw["m"] = m
    return RunLog(config=config_to_dict(config_from_dict(raw)))


def minimal_run_log():
    """Two evaluations, one inference, all consistent."""
    log = fresh_log(m=2)
    log.append(0.0, "eval_submitted", ticket=0, x_unit=[0.4, 0.4], x_raw=[0.4, 0.4], provenance="init")
    log.append(0.0, "eval_submitted", ticket=1, x_unit=[0.6, 0.6], x_raw=[0.6, 0.6], provenance="init")
    log.append(1.0, "eval_completed", ticket=0, y=1.5)
    h = snapshot_hash([[0.4, 0.4]], [1.5], [1], [[0.6, 0.6]])
    log.append(1.0, "inference_submitted", ticket=0, n_obs=1, n_pending=1, snapshot_hash=h)
    log.append(1.5, "inference_completed", ticket=0, choice={
        "x_unit": [0.5, 0.5],
        "provenance": "default",
        "diagnostics": {"hypers": None, "tau": None, "counts": None,
                        "improvement": None, "n_obs": 1, "n_pending": 1},
    })
    log.append(2.0, "eval_completed", ticket=1, y=0.5)
    return log


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        log = minimal_run_log()
        path = tmp_path / "events.jsonl"
        log.save(path)
        assert RunLog.load(path) == log

    def test_empty_run_summary_is_header_only(self, tmp_path):
        log = fresh_log()
        path = tmp_path / "summary.csv"
        write_summary_csv(log, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert lines[0] == "index,time,x0,x1,y,provenance,best_so_far"

    def test_schema_version_mismatch_reports_line(self, tmp_path):
        log = minimal_run_log()
        path = tmp_path / "events.jsonl"
        log.save(path)
        lines = path.read_text().splitlines()
        lines[3] = lines[3].replace('"v": 1', '"v": 2')
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(LogFormatError, match="line 4"):
            RunLog.load(path)

    def test_truncated_line_reports_line(self, tmp_path):
        log = minimal_run_log()
        path = tmp_path / "events.jsonl"
        log.save(path)
        content = path.read_text().splitlines()
        content[-1] = content[-1][: len(content[-1]) // 2]
        path.write_text("\n".join(content) + "\n")
        with pytest.raises(LogFormatError, match=f"line {len(content)}"):
            RunLog.load(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text('{"v": 1, "kind": "eval_submitted", "t": 0.0}\n')
        with pytest.raises(LogFormatError, match="header"):
            RunLog.load(path)

    def test_summary_rows_track_best(self):
        log = minimal_run_log()
        rows = log.summary_rows()
        assert [r["y"] for r in rows] == [1.5, 0.5]
        assert [r["best_so_far"] for r in rows] == [1.5, 1.5]
        assert [r["provenance"] for r in rows] == ["init", "init"]


class TestSnapshotHash:
    def test_sensitive_to_every_component(self):
        base = snapshot_hash([[0.1, 0.2]], [1.0], [5], [[0.3, 0.4]])
        assert snapshot_hash([[0.1, 0.2]], [1.0], [5], [[0.3, 0.4]]) == base
        assert snapshot_hash([[0.1, 0.21]], [1.0], [5], [[0.3, 0.4]]) != base
        assert snapshot_hash([[0.1, 0.2]], [1.1], [5], [[0.3, 0.4]]) != base
        assert snapshot_hash([[0.1, 0.2]], [1.0], [6], [[0.3, 0.4]]) != base
        assert snapshot_hash([[0.1, 0.2]], [1.0], [5], [[0.3, 0.41]]) != base

    def test_roundtrips_through_json_floats(self):
        import json

        x = [0.1 + 0.2, 1.0 / 3.0]
        again = json.loads(json.dumps(x))
        assert snapshot_hash([x], [0.7], [], []) == snapshot_hash([again], [0.7], [], [])


class TestInvariantChecks:
    def test_clean_log_passes(self):
        report = verify_run_invariants(minimal_run_log())
        assert report.n_completed == 2
        assert report.max_in_flight == 2

    def test_in_flight_bound_violation(self):
        log = fresh_log(m=1)
        log.append(0.0, "eval_submitted", ticket=0, x_unit=[0.4, 0.4], x_raw=[0.4, 0.4], provenance="init")
        log.append(0.0, "eval_submitted", ticket=1, x_unit=[0.6, 0.6], x_raw=[0.6, 0.6], provenance="init")
        with pytest.raises(InvariantViolation, match="in-flight"):
            verify_run_invariants(log)

    def test_duplicate_ticket_violation(self):
        log = fresh_log()
        log.append(0.0, "eval_submitted", ticket=0, x_unit=[0.4, 0.4], x_raw=[0.4, 0.4], provenance="init")
        log.append(0.5, "eval_completed", ticket=0, y=1.0)
        log.append(1.0, "eval_completed", ticket=0, y=1.0)
        with pytest.raises(InvariantViolation, match="not running"):
            verify_run_invariants(log)

    def test_snapshot_mismatch_violation(self):
        log = minimal_run_log()
        for e in log.events:
            if e.kind == "inference_submitted":
                e.payload["snapshot_hash"] = "0" * 16
        with pytest.raises(InvariantViolation, match="snapshot"):
            verify_run_invariants(log)

    def test_unfinished_ticket_violation(self):
        log = fresh_log()
        log.append(0.0, "eval_submitted", ticket=0, x_unit=[0.4, 0.4], x_raw=[0.4, 0.4], provenance="init")
        with pytest.raises(InvariantViolation, match="left running"):
            verify_run_invariants(log)

    def test_edge_submission_violation(self):
        log = fresh_log()
        log.append(0.0, "eval_submitted", ticket=0, x_unit=[0.0, 0.4], x_raw=[0.0, 0.4], provenance="init")
        log.append(0.5, "eval_completed", ticket=0, y=1.0)
        with pytest.raises(InvariantViolation, match="edge"):
            verify_run_invariants(log)

    def test_unknown_event_kind_rejected(self):
        log = fresh_log()
        with pytest.raises(ValueError, match="unknown event kind"):
            log.append(0.0, "eval_started", ticket=0)
