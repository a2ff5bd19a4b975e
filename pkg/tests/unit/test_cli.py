"""Unit tests for the command line and its exit codes."""

import shutil
from pathlib import Path

import pandas as pd
import pytest
from pytest_mock import MockerFixture

from src.cli import run
from src.experiments.synth import SynthConfig, synth_generate
from src.ingest.wfdb import write_record
from src.utils.config import Settings

pytestmark = pytest.mark.unit


@pytest.fixture(autouse=True)
def cli_settings(mocker: MockerFixture) -> Settings:
    """Settings without DATABASE_ROOT, independent of the environment and .env."""
    cfg = Settings(_env_file=None, database_root=None, jobs=1, permutations=100)
    mocker.patch("src.cli.get_settings", return_value=cfg)
    return cfg


@pytest.fixture
def record_base(tmp_path: Path) -> Path:
    synth = synth_generate(SynthConfig(duration_s=60.0, n_leads=2), seed=1)
    return write_record(synth.record, tmp_path / "rec", comments=("subject: subj00",))


class TestRecordCommands:
    """Tests for inspect and detect."""

    def test_inspect(self, record_base: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["inspect", str(record_base)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert "fs=500 Hz" in out
        assert "leads=I,II" in out
        assert "# subject: subj00" in out

    def test_inspect_missing_record_is_a_data_error(self, tmp_path: Path) -> None:
        assert run(["inspect", str(tmp_path / "absent")]) == 2

    def test_csv_needs_sampling_rate(self, tmp_path: Path) -> None:
        path = tmp_path / "r.csv"
        path.write_text("I\n0.0\n0.1\n")
        assert run(["inspect", str(path)]) == 1

    def test_detect_to_stdout(self, record_base: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["detect", str(record_base), "--lead", "II"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "r_index,r_seconds"
        assert 55 <= len(lines) - 1 <= 62

    def test_detect_to_file(self, record_base: Path, tmp_path: Path) -> None:
        out = tmp_path / "peaks" / "r.csv"
        assert run(["detect", str(record_base), "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["r_index", "r_seconds"]

    def test_detect_unknown_lead(self, record_base: Path) -> None:
        assert run(["detect", str(record_base), "--lead", "V6"]) == 2


class TestSynthCommand:
    def test_writes_database(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        out = tmp_path / "db"
        code = run(["synth", "--out", str(out), "--subjects", "2", "--duration", "45"])
        assert code == 0
        records = (out / "RECORDS").read_text().splitlines()
        assert records == ["subj00/subj00_s0", "subj01/subj01_s0"]
        assert "2 records written" in capsys.readouterr().out

    def test_too_short_is_a_data_error(self, tmp_path: Path) -> None:
        assert run(["synth", "--out", str(tmp_path), "--duration", "10"]) == 2

    def test_invalid_config_is_a_usage_error(self, tmp_path: Path) -> None:
        assert run(["synth", "--out", str(tmp_path), "--fs", "20"]) == 1


class TestExperimentCommands:
    """Tests for option handling of the experiment commands."""

    def test_unknown_method(self, lead_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "lead-sweep", "--db", str(lead_db), "--out", str(tmp_path)]
        assert run([*args, "--methods", "knn,boosting"]) == 1

    def test_missing_database(self, tmp_path: Path) -> None:
        args = ["experiment", "lead-sweep", "--db", str(tmp_path / "nope"), "--out", str(tmp_path)]
        assert run(args) == 1

    def test_no_database_configured(self, tmp_path: Path) -> None:
        assert run(["experiment", "holter-drift", "--out", str(tmp_path)]) == 1

    def test_bad_format(self, holter_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "holter-drift", "--db", str(holter_db), "--out", str(tmp_path)]
        assert run([*args, "--format", "html"]) == 1

    def test_bad_param(self, holter_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "holter-drift", "--db", str(holter_db), "--out", str(tmp_path)]
        assert run([*args, "--methods", "knn", "--param", "knn.k=0"]) == 1

    def test_holter_drift(self, holter_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "holter-drift", "--db", str(holter_db), "--out", str(tmp_path)]
        code = run([*args, "--methods", "centroid,svm", "--slot-minutes", "1", "--seed", "5"])
        assert code == 0
        grid = pd.read_csv(tmp_path / "holter_drift.csv", index_col="method", dtype=str)
        assert list(grid.index) == ["centroid", "svm"]
        assert grid.shape[1] == 4 + 2
        assert (tmp_path / "holter_drift_series.csv").exists()
        assert (tmp_path / "holter_drift.meta.json").exists()

    def test_drug(self, drug_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "drug", "--db", str(drug_db), "--out", str(tmp_path)]
        assert run([*args, "--methods", "centroid", "--format", "markdown"]) == 0
        grid = pd.read_csv(tmp_path / "drug.csv", index_col="method")
        assert list(grid.columns) == ["pre", "post", "reduction", "enriched"]
        assert "before / after" in (tmp_path / "drug.md").read_text()

    def test_drug_without_metadata(self, holter_db: Path, tmp_path: Path) -> None:
        args = ["experiment", "drug", "--db", str(holter_db), "--out", str(tmp_path)]
        assert run([*args, "--methods", "centroid"]) == 2


class TestFeatureCommands:
    def test_featurize_then_eval(self, lead_db: Path, tmp_path: Path) -> None:
        features = tmp_path / "features.csv"
        assert run(["featurize", "--db", str(lead_db), "--lead", "II", "--out", str(features)]) == 0
        table = pd.read_csv(features)
        assert table["subject"].nunique() == 10

        out = tmp_path / "eval"
        args = ["eval", "--train", str(features), "--validate", str(features), "--out", str(out)]
        models = tmp_path / "models"
        assert run([*args, "--methods", "centroid,svm", "--models", str(models)]) == 0
        grid = pd.read_csv(out / "eval.csv", index_col="method", dtype=str)
        assert grid.loc["svm", "validation"] == "not-implemented"
        assert float(grid.loc["centroid", "validation"]) > 0.9
        assert (models / "centroid-validation.npz").exists()

    def test_featurize_skips_an_unreadable_record(self, lead_db: Path, tmp_path: Path) -> None:
        db = tmp_path / "db"
        shutil.copytree(lead_db, db)
        broken = sorted(db.rglob("*.dat"))[0]
        broken.write_bytes(b"\x00")
        features = tmp_path / "features.csv"
        assert run(["featurize", "--db", str(db), "--lead", "II", "--out", str(features)]) == 0
        table = pd.read_csv(features, dtype=str)
        assert table["subject"].nunique() == 10
        assert broken.relative_to(db).with_suffix("").as_posix() not in set(table["record"])

    def test_featurize_without_any_usable_record(self, lead_db: Path, tmp_path: Path) -> None:
        out = tmp_path / "features.csv"
        assert run(["featurize", "--db", str(lead_db), "--lead", "X9", "--out", str(out)]) == 2
        assert not out.exists()


class TestReportCommand:
    """Tests for re-rendering a grid."""

    def test_markdown_to_stdout(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        grid = tmp_path / "lead_sweep.csv"
        grid.write_text("method,I,II,MIN,SPREAD\nknn,1.000000,0.900000,0.900000,0.100000\n")
        assert run(["report", str(grid), "--scheme", "lead-sweep"]) == 0
        out = capsys.readouterr().out
        assert "| k-nearest neighbours | 100 | 90 | 90 | 10 |" in out

    def test_unknown_scheme(self, tmp_path: Path) -> None:
        grid = tmp_path / "g.csv"
        grid.write_text("method,I\nknn,1.0\n")
        assert run(["report", str(grid), "--scheme", "weekly"]) == 1

    def test_corrupt_grid(self, tmp_path: Path) -> None:
        grid = tmp_path / "g.csv"
        grid.write_text("method,I\nknn,lots\n")
        assert run(["report", str(grid), "--scheme", "eval"]) == 2
