import json
import shutil

import pytest

from conftest import write_tiny_dataset
from eegspect.cli import main
from eegspect.config import PipelineConfig, parse_config
from eegspect.pipeline import resolve_jobs

CONFIG = """dataset_dir = "data"
output_dir = "out"
windows = [1, 2, 5, 10]
step_s = 1

[split]
k = 3

[baseline]
epochs = 2
"""


@pytest.fixture(scope="module")
def tiny(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny")
    write_tiny_dataset(root / "data")
    assert main(["catalog", str(root / "data")]) == 0
    (root / "exp.toml").write_text(CONFIG)
    assert main(["run", "--config", str(root / "exp.toml")]) == 0
    return root


def test_catalog_counts(tmp_path, capsys):
    write_tiny_dataset(tmp_path)
    shutil.copy(tmp_path / "tiny01_01.edf", tmp_path / "tiny03_01.edf")
    assert main(["catalog", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "catalog.json").read_text())
    assert [e["source_id"] for e in doc["entries"]] == ["tiny01_01", "tiny02_01", "tiny03_01"]
    assert doc["entries"][2]["seizures"] == []
    assert "3 recording(s)" in capsys.readouterr().out


def test_catalog_empty_directory(tmp_path):
    assert main(["catalog", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "catalog.json").read_text())["entries"] == []


def test_catalog_unreadable_file_is_partial(tmp_path, caplog):
    write_tiny_dataset(tmp_path)
    (tmp_path / "broken.edf").write_bytes(b"0" * 100)
    assert main(["catalog", str(tmp_path)]) == 2
    assert "broken.edf" in caplog.text
    assert len(json.loads((tmp_path / "catalog.json").read_text())["entries"]) == 2


def test_catalog_missing_directory(tmp_path, capsys):
    assert main(["catalog", str(tmp_path / "nope")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_run_without_catalog_names_stage(tmp_path, capsys):
    (tmp_path / "data").mkdir()
    (tmp_path / "exp.toml").write_text(CONFIG)
    assert main(["run", "--config", str(tmp_path / "exp.toml")]) == 1
    assert "catalog" in capsys.readouterr().err


def test_run_bad_config(tmp_path, capsys):
    (tmp_path / "exp.toml").write_text("windoze = [1]\n")
    assert main(["run", "--config", str(tmp_path / "exp.toml")]) == 1
    assert "windoze" in capsys.readouterr().err


def test_run_outputs(tiny):
    out = tiny / "out"
    rows = (out / "metrics.csv").read_text().splitlines()[1:]
    assert len(rows) == 16 * 3
    for fold in range(3):
        assert sum(1 for r in rows if r.split(",")[3] == str(fold)) == 16
    ranking = (out / "ranking.csv").read_text().splitlines()
    assert len(ranking) == 17 and ranking[1].startswith("1,logreg,")
    assert len(list((out / "roc").iterdir())) == 16
    stats = json.loads((out / "stats.json").read_text())
    assert len(stats["tests"]) == 4 + 4
    band = (out / "band_power.csv").read_text().splitlines()
    assert band[0].startswith("window_s,source_id,start_s,label,delta,theta")
    manifest = json.loads((out / "manifest.json").read_text())
    assert "metrics.csv" in manifest["outputs"]
    assert not any(k.startswith("cache/") for k in manifest["outputs"])


def test_rerun_is_identical(tiny):
    before = (tiny / "out" / "manifest.json").read_text()
    assert main(["run", "--config", str(tiny / "exp.toml")]) == 0
    assert (tiny / "out" / "manifest.json").read_text() == before


def test_skipped_recording_gives_partial_exit(tmp_path, capsys):
    write_tiny_dataset(tmp_path / "data")
    assert main(["catalog", str(tmp_path / "data")]) == 0
    (tmp_path / "data" / "tiny02_01.edf").write_bytes(b"garbage")
    (tmp_path / "exp.toml").write_text(CONFIG.replace("[1, 2, 5, 10]", "[2]")
                                       .replace('"out"', '"out2"'))
    assert main(["run", "--config", str(tmp_path / "exp.toml")]) == 2
    assert (tmp_path / "out2" / "metrics.csv").exists()


def test_print_config_defaults(capsys):
    assert main(["run", "--print-config"]) == 0
    text = capsys.readouterr().out
    assert parse_config(text) == PipelineConfig()


def test_print_config_from_file(tiny, capsys):
    assert main(["run", "--config", str(tiny / "exp.toml"), "--print-config"]) == 0
    cfg = parse_config(capsys.readouterr().out)
    assert cfg.windows == (1, 2, 5, 10) and cfg.split.k == 3 and cfg.baseline.epochs == 2


def test_run_requires_config():
    with pytest.raises(SystemExit):
        main(["run"])


def test_synth_command(tmp_path):
    assert main(["synth", "--seed", "2", "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("*.edf"))) == 6
    assert (tmp_path / "synth-summary.txt").exists()
    assert main(["catalog", str(tmp_path)]) == 0


def test_jobs_resolution(monkeypatch):
    monkeypatch.delenv("EEGSPECT_JOBS", raising=False)
    assert resolve_jobs() == 1
    monkeypatch.setenv("EEGSPECT_JOBS", "3")
    assert resolve_jobs() == 3
    assert resolve_jobs(2) == 2
    with pytest.raises(ValueError):
        resolve_jobs(0)
