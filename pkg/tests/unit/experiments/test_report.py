"""Unit tests for experiment reports."""

import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from src.experiments.report import (
    CorrelationRow,
    ExperimentReport,
    Marker,
    ReportMetadata,
    SeriesPoint,
)
from src.experiments.splits import Scheme
from src.stats.correlation import spearman
from src.utils.exceptions import ExperimentError

pytestmark = pytest.mark.unit


def _sweep(**overrides) -> ExperimentReport:
    fields = {
        "scheme": Scheme.LEAD_SWEEP,
        "methods": ("knn", "svm"),
        "conditions": ("I", "II"),
        "cells": {
            ("knn", "I"): 1.0,
            ("knn", "II"): 0.9,
            ("svm", "I"): Marker.NOT_IMPLEMENTED,
            ("svm", "II"): Marker.NOT_IMPLEMENTED,
        },
        "metadata": ReportMetadata(seed=42, dataset="synthetic"),
    }
    fields.update(overrides)
    return ExperimentReport(**fields)


def _drug() -> ExperimentReport:
    cells = {
        ("centroid", "pre"): 1.0,
        ("centroid", "post"): 0.75,
        ("centroid", "reduction"): 0.25,
        ("centroid", "enriched"): 0.875,
    }
    return ExperimentReport(
        scheme=Scheme.DRUG_EFFECT,
        methods=("centroid",),
        conditions=("pre", "post", "reduction", "enriched"),
        cells=cells,
        summarized=False,
        metadata=ReportMetadata(seed=1),
    )


class TestValidation:
    """Tests for grid completeness and cell checks."""

    def test_markers_are_stored_as_strings(self) -> None:
        report = _sweep()
        assert report.cell("svm", "I") == "not-implemented"
        assert report.numeric("svm", "I") is None
        assert report.numeric("knn", "II") == 0.9

    def test_missing_cell(self) -> None:
        with pytest.raises(ValidationError, match="missing cell"):
            _sweep(cells={("knn", "I"): 1.0})

    def test_unknown_marker(self) -> None:
        cells = {("knn", "I"): 1.0, ("knn", "II"): "oops", ("svm", "I"): 0.5, ("svm", "II"): 0.5}
        with pytest.raises(ValidationError, match="unknown marker"):
            _sweep(cells=cells)

    def test_out_of_range(self) -> None:
        cells = {("knn", "I"): 1.5, ("knn", "II"): 0.5, ("svm", "I"): 0.5, ("svm", "II"): 0.5}
        with pytest.raises(ValidationError, match="out of range"):
            _sweep(cells=cells)

    def test_negative_reduction_allowed(self) -> None:
        cells = {("knn", "I"): -0.1, ("knn", "II"): 0.5, ("svm", "I"): 0.5, ("svm", "II"): 0.5}
        assert _sweep(cells=cells).numeric("knn", "I") == -0.1


class TestRendering:
    def test_csv_text(self) -> None:
        assert _sweep().render_csv() == (
            "method,I,II,MIN,SPREAD\n"
            "knn,1.000000,0.900000,0.900000,0.100000\n"
            "svm,not-implemented,not-implemented,,\n"
        )

    def test_csv_is_stable(self) -> None:
        assert _sweep().render_csv() == _sweep().render_csv()

    def test_unsummarized_table_has_no_summary_columns(self) -> None:
        assert list(_drug().table().columns) == ["pre", "post", "reduction", "enriched"]

    def test_markdown_uses_display_names_and_percent(self) -> None:
        text = _sweep().render_markdown()
        lines = text.splitlines()
        assert lines[0] == "| method | I | II | MIN | MAX-MIN |"
        assert lines[2] == "| k-nearest neighbours | 100 | 90 | 90 | 10 |"
        assert lines[3].startswith("| support vector machine | not-implemented |")

    def test_markdown_drug_titles(self) -> None:
        header = _drug().render_markdown().splitlines()[0]
        assert header == (
            "| method | before / before | before / after | reduction | before+after / after |"
        )

    def test_markdown_correlations(self) -> None:
        corr = CorrelationRow.from_result(
            "MIN vs SPREAD", spearman([1, 2, 3, 4], [2, 1, 4, 3], permutations=50)
        )
        text = _sweep(correlations=(corr,)).render_markdown()
        assert "MIN vs SPREAD: spearman = 0.600" in text


class TestFiles:
    """Tests for written outputs."""

    def test_write_all(self, tmp_path: Path) -> None:
        corr = CorrelationRow.from_result("x", spearman([1, 2, 3], [1, 3, 2], permutations=10))
        series = (SeriesPoint(method="knn", slot_hours=0.5, accuracy=0.9),)
        report = _sweep(correlations=(corr,), series=series)

        written = report.write_all(tmp_path, "lead_sweep", fmt="markdown")

        assert sorted(p.name for p in written) == [
            "lead_sweep.csv",
            "lead_sweep.md",
            "lead_sweep.meta.json",
            "lead_sweep_correlations.csv",
            "lead_sweep_series.csv",
        ]
        assert (tmp_path / "lead_sweep_series.csv").read_text() == (
            "method,slot_hours,accuracy\nknn,0.5,0.900000\n"
        )
        meta = json.loads((tmp_path / "lead_sweep.meta.json").read_text())
        assert meta["scheme"] == "lead-sweep"
        assert meta["metadata"]["seed"] == 42
        assert "generated_at" in meta

    def test_csv_only_by_default(self, tmp_path: Path) -> None:
        written = _sweep().write_all(tmp_path, "eval")
        assert [p.name for p in written] == ["eval.csv", "eval.meta.json"]

    @pytest.mark.parametrize("factory", [_sweep, _drug])
    def test_round_trip(self, factory, tmp_path: Path) -> None:
        original = factory()
        path = original.to_csv(tmp_path / "grid.csv")
        loaded = ExperimentReport.from_csv(path, original.scheme)
        assert loaded.methods == original.methods
        assert loaded.conditions == original.conditions
        assert loaded.cells == original.cells
        assert loaded.summarized == original.summarized
        assert loaded.render_csv() == original.render_csv()

    def test_bad_cell(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.csv"
        path.write_text("method,I\nknn,high\n")
        with pytest.raises(ExperimentError, match="neither an accuracy nor a marker"):
            ExperimentReport.from_csv(path, Scheme.LEAD_SWEEP)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ExperimentError, match="cannot read report"):
            ExperimentReport.from_csv(tmp_path / "absent.csv", Scheme.LEAD_SWEEP)
