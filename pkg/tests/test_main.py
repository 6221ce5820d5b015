"""Tests for the command entry point."""

from __future__ import annotations

import json
import logging
import shutil
from collections.abc import Iterator
from pathlib import Path
from typing import Callable

import pandas as pd
import pytest

from igep_scenarios.ensemble import write_ensemble_csv
from igep_scenarios.logging_config import PACKAGE_LOGGER
from igep_scenarios.main import main

REPO_SCHEMA = Path(__file__).parent.parent / "config" / "config.schema.json"


@pytest.fixture(autouse=True)
def reset_package_logger() -> Iterator[None]:
    yield
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


def write_config(directory: Path, data: dict, with_schema: bool = False) -> Path:
    config_dir = directory / "config"
    config_dir.mkdir(parents=True, exist_ok=True)
    if with_schema:
        shutil.copy(REPO_SCHEMA, config_dir / "config.schema.json")
    path = config_dir / "config.json"
    path.write_text(json.dumps(data))
    return path


QUIET = {"logging": {"level": "WARNING"}}


class TestSynth:
    """Tests for the synth command."""

    def test_writes_market_csv(self, tmp_path: Path) -> None:
        config_path = write_config(tmp_path, QUIET, with_schema=True)
        out = tmp_path / "market.csv"
        code = main(
            ["synth", "--config", str(config_path), "--out", str(out), "--days", "12", "--start", "2016-03-01"]
        )
        assert code == 0
        frame = pd.read_csv(out)
        assert len(frame) == 12 * 24
        assert list(frame.columns) == ["timestamp", "price", "load_forecast", "wind_forecast", "solar_forecast"]
        assert frame["timestamp"].iloc[0] == "2016-03-01T00:00:00"

    def test_seed_override(self, tmp_path: Path) -> None:
        config_path = write_config(tmp_path, QUIET)
        outputs = []
        for seed, name in ((1, "a.csv"), (1, "b.csv"), (2, "c.csv")):
            out = tmp_path / name
            main(["synth", "-c", str(config_path), "-o", str(out), "--days", "3", "-s", str(seed)])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert outputs[0] != outputs[2]

    def test_env_file_expands_log_path(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        """.env next to config.json is loaded before ${VAR} expansion."""
        monkeypatch.setenv("IGEP_TEST_LOG_DIR", "unset")
        monkeypatch.delenv("IGEP_TEST_LOG_DIR")
        config_path = write_config(
            tmp_path, {"logging": {"level": "INFO", "file": "${IGEP_TEST_LOG_DIR}/igep.log"}}
        )
        (config_path.parent / ".env").write_text(f"IGEP_TEST_LOG_DIR={tmp_path / 'logs'}\n")
        code = main(["synth", "-c", str(config_path), "-o", str(tmp_path / "m.csv"), "--days", "2"])
        assert code == 0
        assert "synth starting" in (tmp_path / "logs" / "igep.log").read_text()


class TestErrors:
    """Failures print one error line and return 1."""

    def test_missing_config(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = main(["backtest", "--config", str(tmp_path / "none.json")])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("Error [config]: Config file not found")
        assert "--config" in err

    def test_schema_violation(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        config_path = write_config(tmp_path, {"backtest": {"methods": ["gan"]}}, with_schema=True)
        assert main(["backtest", "-c", str(config_path)]) == 1
        assert capsys.readouterr().err.startswith(
            "Error [config]: Config validation failed at 'backtest -> methods -> 0'"
        )

    def test_stage_error_names_stage_and_day(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        config_path = write_config(
            tmp_path,
            {
                "data": {"synthetic": {"start": "2015-01-01", "n_days": 110}},
                "split": {
                    "ensemble_train_start": "2015-01-01",
                    "prob_train_start": "2015-03-01",
                    "test_start": "2015-04-11",
                    "test_end": "2015-04-25",
                },
                "backtest": {"output": {"dir": str(tmp_path / "out")}},
                **QUIET,
            },
            with_schema=True,
        )
        assert main(["backtest", "-c", str(config_path)]) == 1
        err = capsys.readouterr().err
        assert err.startswith("Error [data]: 2015-04-25: day outside dataset range")

    def test_score_missing_run(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        config_path = write_config(tmp_path, QUIET)
        assert main(["score", "-c", str(config_path), "--run", str(tmp_path / "run-0")]) == 1
        assert capsys.readouterr().err.startswith("Error [score]:")


class TestPlot:
    """Tests for the plot command."""

    def test_plots_from_ensemble_csv(self, tmp_path: Path, make_forecasts: Callable) -> None:
        forecasts, actuals = make_forecasts(n_days=3)
        ensemble_csv = write_ensemble_csv(forecasts, actuals, tmp_path / "ensemble.csv")
        config_path = write_config(tmp_path, QUIET)
        out = tmp_path / "fan.svg"
        day = forecasts[1].day.isoformat()
        code = main(
            ["plot", "-c", str(config_path), "--ensemble", str(ensemble_csv), "--date", day, "-o", str(out)]
        )
        assert code == 0
        assert out.read_text().lstrip().startswith("<?xml")

    def test_unknown_day(
        self, tmp_path: Path, make_forecasts: Callable, capsys: pytest.CaptureFixture[str]
    ) -> None:
        forecasts, actuals = make_forecasts(n_days=2)
        ensemble_csv = write_ensemble_csv(forecasts, actuals, tmp_path / "ensemble.csv")
        config_path = write_config(tmp_path, QUIET)
        code = main(
            ["plot", "-c", str(config_path), "--ensemble", str(ensemble_csv), "--date", "2016-06-01"]
        )
        assert code == 1
        assert capsys.readouterr().err.startswith("Error [plot]: 2016-06-01: no ensemble forecast")
