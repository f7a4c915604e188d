import json

import pytest

from conftest import SMALL_SCENARIO
from lanwatch.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """synth -> detect on a small scenario, shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    scenario = root / "small.ini"
    scenario.write_text(SMALL_SCENARIO, encoding="utf-8")
    data = root / "data"
    assert main(["synth", "--scenario", str(scenario),
                 "--out", str(data)]) == 0
    out = root / "run"
    assert main(["detect", "--arp", str(data / "arp.csv"),
                 "--tcp", str(data / "tcp.csv"),
                 "--udp", str(data / "udp.csv"),
                 "--window-size", "172800", "--step", "3600",
                 "--detectors", "lookout,ocsvm",
                 "--out", str(out)]) == 0
    return root


def test_synth_outputs(workdir):
    data = workdir / "data"
    for name in ("arp.csv", "tcp.csv", "udp.csv", "labels.csv"):
        assert (data / name).exists()


def test_detect_outputs(workdir):
    out = workdir / "run"
    assert (out / "report.json").exists()
    assert (out / "report-lookout.csv").exists()
    assert (out / "report-ocsvm.csv").exists()
    manifest = json.loads((out / "run-manifest.json").read_text())
    assert manifest["config"]["width"] == 172800
    assert sorted(manifest["inputs"]) == ["arp", "tcp", "udp"]
    for entry in manifest["inputs"].values():
        assert len(entry["sha256"]) == 64


def test_detect_from_manifest_reproduces(workdir, tmp_path):
    out2 = tmp_path / "rerun"
    assert main(["detect", "--from-manifest",
                 str(workdir / "run" / "run-manifest.json"),
                 "--out", str(out2)]) == 0
    orig = (workdir / "run" / "report.json").read_bytes()
    assert (out2 / "report.json").read_bytes() == orig


def test_evaluate_with_labels(workdir, tmp_path):
    out = tmp_path / "eval"
    assert main(["evaluate", "--report", str(workdir / "run" / "report.json"),
                 "--labels", str(workdir / "data" / "labels.csv"),
                 "--out", str(out)]) == 0
    ed = (out / "early_detection.csv").read_text().splitlines()
    assert ed[0] == "node,honeypot_time,detect_time,status,diff"
    assert any(line.startswith("X159,") for line in ed[1:])
    assert (out / "fpr.csv").exists()
    assert (out / "score_totals.csv").exists()


def test_evaluate_positives_from_data(workdir, tmp_path):
    out = tmp_path / "eval2"
    data = workdir / "data"
    assert main(["evaluate", "--report", str(workdir / "run" / "report.json"),
                 "--positives", "from-data",
                 "--arp", str(data / "arp.csv"),
                 "--tcp", str(data / "tcp.csv"),
                 "--udp", str(data / "udp.csv"),
                 "--out", str(out)]) == 0
    assert (out / "early_detection.csv").exists()


def test_missing_input_is_error(tmp_path, capsys):
    assert main(["detect", "--arp", str(tmp_path / "absent.csv"),
                 "--out", str(tmp_path / "o")]) == 1
    assert "not found" in capsys.readouterr().err


def test_require_all_enforced(workdir, tmp_path, capsys):
    data = workdir / "data"
    assert main(["detect", "--arp", str(data / "arp.csv"), "--require-all",
                 "--out", str(tmp_path / "o")]) == 1
    assert "tcp" in capsys.readouterr().err


def test_evaluate_needs_ground_truth(workdir, tmp_path, capsys):
    assert main(["evaluate", "--report", str(workdir / "run" / "report.json"),
                 "--out", str(tmp_path / "o")]) == 1
    assert "labels" in capsys.readouterr().err


def test_unknown_detector_rejected(workdir, tmp_path, capsys):
    data = workdir / "data"
    with pytest.raises(SystemExit):
        main(["detect"])            # missing required args
    assert main(["detect", "--arp", str(data / "arp.csv"),
                 "--detectors", "oracle", "--out", str(tmp_path / "o")]) == 1
    assert "oracle" in capsys.readouterr().err
