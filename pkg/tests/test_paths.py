"""Tests for path expansion and the run directory layout."""

from __future__ import annotations

import os
from datetime import date
from pathlib import Path
from unittest import mock

from igep_scenarios.paths import RunLayout, expand_path, expand_path_to_path


class TestExpandPath:
    """Tests for expand_path."""

    def test_expands_tilde(self) -> None:
        result = expand_path("~/runs")
        assert result.startswith(str(Path.home()))
        assert result.endswith("/runs")

    def test_expands_env_var(self) -> None:
        """${VAR} and $VAR are both expanded."""
        with mock.patch.dict(os.environ, {"IGEP_DATA": "/data/markets"}):
            assert expand_path("${IGEP_DATA}/de.csv") == "/data/markets/de.csv"
            assert expand_path("$IGEP_DATA/de.csv") == "/data/markets/de.csv"

    def test_leaves_undefined_var_unchanged(self) -> None:
        """Undefined variables stay in place so file errors name them."""
        env = {k: v for k, v in os.environ.items() if k != "IGEP_UNDEFINED"}
        with mock.patch.dict(os.environ, env, clear=True):
            assert expand_path("${IGEP_UNDEFINED}/de.csv") == "${IGEP_UNDEFINED}/de.csv"

    def test_relative_path_unchanged(self) -> None:
        assert expand_path("out/runs") == "out/runs"

    def test_returns_path_object(self) -> None:
        with mock.patch.dict(os.environ, {"IGEP_OUT": "/tmp/igep"}):
            assert expand_path_to_path("${IGEP_OUT}/run-0") == Path("/tmp/igep/run-0")


class TestRunLayout:
    """Tests for RunLayout."""

    def test_artifact_paths(self, tmp_path: Path) -> None:
        layout = RunLayout(tmp_path, "run-7")
        day = date(2017, 3, 5)
        assert layout.run_dir == tmp_path / "run-7"
        assert layout.report_csv == tmp_path / "run-7" / "report.csv"
        assert layout.report_txt.name == "report.txt"
        assert layout.ensemble_csv.name == "ensemble.csv"
        assert layout.point_report_txt.name == "point_report.txt"
        assert layout.scenario_csv("igep", day) == tmp_path / "run-7" / "scenarios" / "igep" / "2017-03-05.csv"
        assert layout.plot_svg(day) == tmp_path / "run-7" / "plots" / "2017-03-05.svg"
        assert layout.model_json("mge") == tmp_path / "run-7" / "models" / "mge.json"
        assert layout.log_file == tmp_path / "run-7" / "backtest.log"

    def test_ensure_creates_tree(self, tmp_path: Path) -> None:
        layout = RunLayout(tmp_path / "out", "run-0").ensure()
        for sub in ("scenarios", "plots", "models"):
            assert (layout.run_dir / sub).is_dir()

    def test_ensure_is_repeatable(self, tmp_path: Path) -> None:
        RunLayout(tmp_path, "run-0").ensure()
        RunLayout(tmp_path, "run-0").ensure()

    def test_from_config_expands(self) -> None:
        with mock.patch.dict(os.environ, {"IGEP_OUT": "/srv/igep"}):
            layout = RunLayout.from_config("${IGEP_OUT}", "run-1")
        assert layout.run_dir == Path("/srv/igep/run-1")
