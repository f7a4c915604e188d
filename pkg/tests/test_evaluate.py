import pytest

from lanwatch.evaluate import (DetectionStatus, classify_diff, early_detection,
                               fpr_series, score_totals,
                               write_early_detection_csv, write_fpr_csv,
                               write_score_totals_csv)
from lanwatch.pipeline import ReportEntry, WindowReport


def entry(node, h=True, v=False, hs=9.0, vs=None):
    return ReportEntry(node, h, v, hs if h else None, vs, ())


def reports():
    return [
        WindowReport(0, 0, 3600, entries=[entry("A"), entry("N")],
                     active_nodes=("A", "B", "N")),
        WindowReport(1, 3600, 7200, entries=[entry("A", vs=5.0, v=True)],
                     active_nodes=("A", "B", "C", "N")),
        WindowReport(2, 7200, 10800, entries=[], active_nodes=("B",)),
    ]


def test_classify_diff_boundaries():
    assert classify_diff(0, 3600) is DetectionStatus.EARLY
    assert classify_diff(5, 3600) is DetectionStatus.EARLY
    assert classify_diff(-5, 3600) is DetectionStatus.SAME_WINDOW
    assert classify_diff(-3600, 3600) is DetectionStatus.SAME_WINDOW
    assert classify_diff(-3601, 3600) is DetectionStatus.LATE


def test_early_detection_rows():
    rows = early_detection(reports(), {"A": 3700, "Z": 100}, step=3600)
    byname = {r.node: r for r in rows}
    a = byname["A"]
    assert a.earliest_detection_time == 3600     # end of first flagging window
    assert a.time_difference == 100
    assert a.status is DetectionStatus.EARLY
    z = byname["Z"]
    assert z.status is DetectionStatus.NEVER
    assert z.earliest_detection_time is None and z.time_difference is None


def test_early_detection_late():
    reps = [WindowReport(0, 0, 3600, entries=[entry("A")])]
    (row,) = early_detection(reps, {"A": -5000}, step=3600)
    assert row.status is DetectionStatus.LATE
    assert row.time_difference == -8600


def test_fpr_series_counts():
    pts = fpr_series(reports(), {"A": 3700})
    assert [(p.false_positives, p.negatives) for p in pts] == [(1, 2), (0, 3), (0, 1)]
    assert pts[0].rate == pytest.approx(0.5)


def test_fpr_no_negatives_is_undefined():
    reps = [WindowReport(0, 0, 1, entries=[], active_nodes=("A",))]
    (p,) = fpr_series(reps, {"A": 0})
    assert p.rate is None and p.negatives == 0


def test_score_totals_sorted_desc():
    rows = score_totals(reports())
    assert [r.node for r in rows] == ["A", "N"]
    a = rows[0]
    assert a.horizontal_total == pytest.approx(18.0)
    assert a.vertical_total == pytest.approx(5.0)
    assert a.n_windows == 2
    assert a.mean_per_window == pytest.approx(23.0 / 2)


def test_csv_writers(tmp_path):
    rows = early_detection(reports(), {"A": 3700, "Z": 100}, step=3600)
    write_early_detection_csv(tmp_path / "ed.csv", rows)
    lines = (tmp_path / "ed.csv").read_text().splitlines()
    assert lines[0] == "node,honeypot_time,detect_time,status,diff"
    assert "Z,100,,NeverDetected," in lines

    write_fpr_csv(tmp_path / "fpr.csv",
                  {"lookout": fpr_series(reports(), {"A": 0})})
    fpr_lines = (tmp_path / "fpr.csv").read_text().splitlines()
    assert fpr_lines[0] == "window,fp,negatives,rate,detector"
    assert all(line.endswith("lookout") for line in fpr_lines[1:])

    write_score_totals_csv(tmp_path / "tot.csv", score_totals(reports()))
    tot = (tmp_path / "tot.csv").read_text().splitlines()
    assert tot[0] == "node,h_total,v_total,total,n_windows,mean"
    assert len(tot) == 3
