import json

import numpy as np
import pytest

from conftest import DATA, T0, grid_capture

from imufill import (
    Capture,
    ImputationConfig,
    RowState,
    SensorKind,
    Status,
    detect_gaps,
    impute_capture,
    parse_capture,
    run_pipeline,
    scan_dataset,
    serialize_capture,
    write_capture,
)
from imufill.pipeline import DatasetStats, discover_captures, scan_directory


def short(n_missing, sensor=SensorKind.ACCELEROMETER, **kwargs):
    return grid_capture(5 * sensor.nominal_rate_hz - n_missing, sensor, **kwargs)


def test_downstairs_end_to_end(downstairs):
    out, log = impute_capture(downstairs)
    assert log.status is Status.COMPLETE
    assert log.passes == 5
    assert len(out) == 500 and out.n_missing == 0
    assert (out.states[450:] == RowState.IMPUTED).all()
    assert np.array_equal(out.values[:450], downstairs.values)
    assert [r.targets[0] for r in log.records] == [450, 460, 470, 480, 490]


def test_complete_capture_is_untouched():
    cap = grid_capture(500)
    out, log = impute_capture(cap)
    assert log.status is Status.COMPLETE and log.passes == 0
    assert out == cap


def test_discard():
    cap = short(101)
    out, log = impute_capture(cap)
    assert log.status is Status.DISCARDED
    assert out is cap


def test_failure_is_logged_not_raised():
    out, log = impute_capture(grid_capture(501))
    assert log.status is Status.FAILED
    assert "OverComplete" in log.error
    assert out.n_missing == 0 and len(out) == 501


def test_log_serializes():
    _, log = impute_capture(short(12))
    blob = json.loads(json.dumps(log.to_dict()))
    assert blob["passes"] == 2 and blob["report"]["missing"] == 12


def test_scan_dataset_buckets():
    items = [
        ("a", "walking", "accelerometer", short(0)),
        ("b", "walking", "accelerometer", short(5)),
        ("c", "walking", "accelerometer", short(150)),
        ("d", "walking", "accelerometer", ValueError("unreadable")),
    ]
    stats = scan_dataset(items)
    c = stats.counts[("walking", "accelerometer")]
    assert (c.complete, c.small, c.medium, c.large) == (1, 1, 0, 1)
    assert c.total == 3
    assert list(stats.failed) == ["d"]


def test_scan_empty():
    assert scan_dataset([]) == DatasetStats()


def test_stats_merge_is_order_independent():
    items = [
        (str(i), act, "accelerometer", short(m))
        for i, (act, m) in enumerate(
            [("walking", 0), ("running", 3), ("walking", 40), ("walking", 101), ("running", 0)]
        )
    ]
    whole = scan_dataset(items)
    left, right = scan_dataset(items[:2]), scan_dataset(items[2:])
    assert left.merge(right) == whole == right.merge(left)
    assert scan_dataset(items[::-1]) == whole


def _tree(root, captures):
    for rel, cap in captures.items():
        write_capture(root / rel, cap)


def test_run_pipeline(tmp_path):
    src = tmp_path / "in"
    _tree(src, {
        "walking/accelerometer/c1.csv": short(0),
        "walking/accelerometer/c2.csv": short(0),
        "running/accelerometer/c3.csv": short(7),
        "running/accelerometer/c4.csv": short(150),
    })
    summary = run_pipeline(src, tmp_path / "out", jobs=1)
    status = {r.path: r.status for r in summary.records}
    assert status == {
        "walking/accelerometer/c1.csv": Status.COMPLETE,
        "walking/accelerometer/c2.csv": Status.COMPLETE,
        "running/accelerometer/c3.csv": Status.COMPLETE,
        "running/accelerometer/c4.csv": Status.DISCARDED,
    }
    assert not (tmp_path / "out/running/accelerometer/c4.csv").exists()
    after = summary.stats_after.counts
    assert after[("walking", "accelerometer")].complete == 2
    assert after[("running", "accelerometer")].complete == 1
    assert after[("running", "accelerometer")].total == 1
    assert summary.exit_code == 0
    assert json.loads((tmp_path / "out/summary.json").read_text())["records"][0]["path"]


def test_run_pipeline_downstairs_provenance(tmp_path):
    src = tmp_path / "in/moving_downstairs/accelerometer"
    src.mkdir(parents=True)
    (src / "excerpt.tsv").write_bytes((DATA / "downstairs_450.tsv").read_bytes())
    summary = run_pipeline(tmp_path / "in", tmp_path / "out")
    (rec,) = summary.records
    assert (rec.status, rec.passes, rec.missing_before, rec.missing_after) == (Status.COMPLETE, 5, 50, 0)
    lines = (tmp_path / "out/moving_downstairs/accelerometer/excerpt.tsv").read_text().splitlines()
    rows = [ln.split(",") for ln in lines[1:]]
    assert len(rows) == 500
    assert {r[-1] for r in rows[:450]} == {"observed"}
    assert {r[-1] for r in rows[450:]} == {"imputed"}
    assert rows[450][1] == "1493996702682" and rows[499][1] == "1493996703172"


def test_failed_file_sets_exit_code(tmp_path):
    src = tmp_path / "in/walking/gyroscope"
    src.mkdir(parents=True)
    (src / "bad.csv").write_text("1,10,x,y,z\n")
    write_capture(src / "good.csv", short(3))
    summary = run_pipeline(tmp_path / "in", tmp_path / "out")
    status = {r.path: r.status for r in summary.records}
    assert status["walking/gyroscope/bad.csv"] is Status.FAILED
    assert status["walking/gyroscope/good.csv"] is Status.COMPLETE
    assert summary.exit_code == 1
    assert "walking/gyroscope/bad.csv" in summary.stats_before.failed


def test_unresolvable_layout_fails_cleanly(tmp_path):
    write_capture(tmp_path / "in/loose.csv", short(0))
    (src,) = discover_captures(tmp_path / "in")
    assert src.error
    (src,) = discover_captures(tmp_path / "in", sensor="accelerometer", activity="walking")
    assert src.error is None


def test_parallel_matches_serial(tmp_path):
    rng = np.random.default_rng(3)
    caps = {
        f"walking/accelerometer/c{i}.csv": short(int(m)) for i, m in enumerate(rng.integers(0, 120, 12))
    }
    _tree(tmp_path / "in", caps)
    serial = run_pipeline(tmp_path / "in", tmp_path / "s", jobs=1, write_summary=False)
    parallel = run_pipeline(tmp_path / "in", tmp_path / "p", jobs=3, write_summary=False)
    assert serial.records == parallel.records
    assert serial.stats_after == parallel.stats_after
    for rel in caps:
        if (tmp_path / "s" / rel).exists():
            assert (tmp_path / "s" / rel).read_bytes() == (tmp_path / "p" / rel).read_bytes()


@pytest.mark.parametrize("provenance", [True, False])
def test_idempotent(tmp_path, downstairs, provenance):
    _tree(tmp_path / "in", {"walking/accelerometer/a.csv": downstairs, "walking/accelerometer/b.csv": short(3)})
    run_pipeline(tmp_path / "in", tmp_path / "o1", provenance=provenance)
    second = run_pipeline(tmp_path / "o1", tmp_path / "o2", provenance=provenance)
    assert all(r.passes == 0 for r in second.records)
    for rel in ("walking/accelerometer/a.csv", "walking/accelerometer/b.csv"):
        assert (tmp_path / "o1" / rel).read_bytes() == (tmp_path / "o2" / rel).read_bytes()


def test_scan_directory_listing(tmp_path):
    _tree(tmp_path, {"standing/magnetometer/a.csv": short(1, SensorKind.MAGNETOMETER)})
    stats, listing = scan_directory(tmp_path)
    assert stats.counts[("standing", "magnetometer")].small == 1
    (rel, report, err) = listing[0]
    assert rel == "standing/magnetometer/a.csv" and report.missing_count == 1 and err is None
