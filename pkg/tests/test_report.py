"""Tests for score reports."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from igep_scenarios.ensemble import PointReport
from igep_scenarios.report import (
    METRICS,
    ScoreReport,
    report_point_forecasts,
    report_scores,
)


def filled_report(repeats: int = 3) -> ScoreReport:
    report = ScoreReport(methods=["igep", "raw"], repeats=repeats)
    gen = np.random.default_rng(4)
    for method in report.methods:
        for metric in METRICS:
            for _ in range(repeats):
                report.add(method, metric, gen.uniform(1.0, 30.0))
    report.experts = {
        "ARX-M": {"MAE": 4.25, "RMSE": 6.5},
        "AVG": {"MAE": 3.9, "RMSE": 5.75},
    }
    return report


class TestScoreReport:
    """Tests for ScoreReport."""

    def test_mean_and_population_std(self) -> None:
        report = ScoreReport(methods=["mge"], repeats=2)
        report.add("mge", "ES", 10.0)
        report.add("mge", "ES", 12.0)
        assert report.mean("mge", "ES") == 11.0
        assert report.std("mge", "ES") == 1.0

    def test_single_repeat_std_is_zero(self) -> None:
        report = ScoreReport(methods=["raw"], repeats=1)
        report.add("raw", "CRPS", 2.5)
        assert report.std("raw", "CRPS") == 0.0

    def test_completeness(self) -> None:
        report = ScoreReport(methods=["raw"], repeats=1)
        assert not report.is_complete
        for metric in METRICS:
            report.add("raw", metric, 1.0)
        assert report.is_complete

    def test_invalid_repeats(self) -> None:
        with pytest.raises(ValueError, match="Invalid repeats"):
            ScoreReport(methods=["raw"], repeats=0)

    def test_csv_round_trip_is_exact(self, tmp_path: Path) -> None:
        report = filled_report()
        path = report.write_csv(tmp_path / "report.csv")
        restored = ScoreReport.read_csv(path)
        assert restored.methods == report.methods
        assert restored.repeats == report.repeats
        assert restored.scores == report.scores
        assert restored.experts == report.experts

    def test_csv_round_trip_keeps_every_bit(self, tmp_path: Path) -> None:
        report = ScoreReport(methods=["igep"], repeats=500)
        gen = np.random.default_rng(13)
        for metric in METRICS:
            for _ in range(500):
                report.add("igep", metric, gen.uniform(0.0, 10.0))
        report.scores["igep"]["ES"][0] = 2.337590011534825
        restored = ScoreReport.read_csv(report.write_csv(tmp_path / "report.csv"))
        assert restored.scores == report.scores

    def test_csv_layout(self, tmp_path: Path) -> None:
        report = filled_report(repeats=2)
        path = report.write_csv(tmp_path / "report.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "section,name,metric,repeat,value"
        # 2 methods × 3 metrics × 2 repeats + 2 experts × 2 metrics
        assert len(lines) == 1 + 12 + 4
        assert lines[-1].startswith("expert,AVG,RMSE,0,")


class TestReportScores:
    """Tests for report_scores."""

    def test_table_contains_mean_and_std(self) -> None:
        report = ScoreReport(methods=["igep"], repeats=2)
        for metric, values in {"ES": (10.0, 12.0), "CRPS": (1.0, 1.0), "RMSE": (5.0, 7.0)}.items():
            for value in values:
                report.add("igep", metric, value)
        text = report_scores(report)
        assert "11.000 ± 1.000" in text
        assert "1.000 ± 0.000" in text
        assert "6.000 ± 1.000" in text
        assert "2 repeat(s)" in text

    def test_writes_files(self, tmp_path: Path) -> None:
        report = filled_report()
        text = report_scores(report, tmp_path / "r.csv", tmp_path / "r.txt")
        assert (tmp_path / "r.csv").exists()
        assert (tmp_path / "r.txt").read_text() == text

    def test_incomplete_report_raises(self, tmp_path: Path) -> None:
        report = ScoreReport(methods=["igep"], repeats=2)
        report.add("igep", "ES", 1.0)
        with pytest.raises(ValueError, match="incomplete"):
            report_scores(report, tmp_path / "r.csv")
        assert not (tmp_path / "r.csv").exists()


class TestReportPointForecasts:
    """Tests for report_point_forecasts."""

    def test_improvement_line(self, tmp_path: Path) -> None:
        point = PointReport(
            names=("ARX-M", "GB", "AVG"),
            mae={"ARX-M": 5.0, "GB": 4.0, "AVG": 3.0},
            rmse={"ARX-M": 8.0, "GB": 6.0, "AVG": 5.4},
        )
        text = report_point_forecasts(point, tmp_path / "point.txt")
        assert "AVG vs best member (GB): MAE +25.0%, RMSE +10.0%" in text
        assert "4.00" in text
        assert (tmp_path / "point.txt").read_text() == text
