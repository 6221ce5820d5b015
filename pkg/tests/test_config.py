"""Tests for configuration loading."""

from __future__ import annotations

import json
import shutil
from datetime import date
from pathlib import Path

import pytest

from igep_scenarios.config import (
    BacktestConfig,
    Config,
    DataConfig,
    EnsembleConfig,
    LoggingConfig,
    OutputConfig,
    SplitConfig,
    find_config_file,
    load_config,
    parse_config,
)

REPO_CONFIG_DIR = Path(__file__).parent.parent / "config"


class TestSplitConfig:
    """Tests for SplitConfig."""

    def test_default_split(self) -> None:
        """Defaults: one year ensemble-only, one year training, one year test."""
        config = SplitConfig()
        assert config.prob_train_days == 366
        assert config.test_days == 365

    def test_single_test_day(self) -> None:
        config = SplitConfig(test_start=date(2017, 1, 1), test_end=date(2017, 1, 1))
        assert config.test_days == 1

    @pytest.mark.parametrize(
        "changes",
        [
            {"prob_train_start": date(2015, 1, 1)},
            {"test_start": date(2015, 6, 1)},
            {"test_end": date(2016, 12, 31)},
        ],
    )
    def test_out_of_order_raises(self, changes: dict) -> None:
        with pytest.raises(ValueError, match="Invalid split"):
            SplitConfig(**changes)


class TestEnsembleConfig:
    """Tests for EnsembleConfig."""

    def test_defaults_use_every_expert(self) -> None:
        config = EnsembleConfig()
        assert config.experts == ["ARX-M", "ARX-U", "Poly-LR", "LW-LR", "GB"]
        assert config.window_days == 365

    def test_short_window_raises(self) -> None:
        with pytest.raises(ValueError, match="Invalid window_days"):
            EnsembleConfig(window_days=29)

    def test_unknown_expert_raises(self) -> None:
        with pytest.raises(ValueError, match="Unknown experts"):
            EnsembleConfig(experts=["ARX-M", "LSTM"])

    def test_single_expert_raises(self) -> None:
        with pytest.raises(ValueError, match="at least 2 experts"):
            EnsembleConfig(experts=["GB"])

    def test_kernel_sign_raises(self) -> None:
        with pytest.raises(ValueError, match="gb_kernel_sign"):
            EnsembleConfig(gb_kernel_sign=0)


class TestBacktestConfig:
    """Tests for BacktestConfig."""

    def test_seed_for_uses_base_seed(self) -> None:
        config = BacktestConfig(base_seed=40, repeats=3)
        assert [config.seed_for(r) for r in range(3)] == [40, 41, 42]

    def test_seed_for_prefers_explicit_seeds(self) -> None:
        config = BacktestConfig(base_seed=40, repeats=2, seeds=[7, 3])
        assert [config.seed_for(r) for r in range(2)] == [7, 3]

    def test_too_few_seeds_raises(self) -> None:
        with pytest.raises(ValueError, match="1 seeds given for 2 repeats"):
            BacktestConfig(repeats=2, seeds=[1])

    def test_unknown_method_raises(self) -> None:
        with pytest.raises(ValueError, match="Unknown methods"):
            BacktestConfig(methods=["igep", "gan"])

    def test_duplicate_method_raises(self) -> None:
        with pytest.raises(ValueError, match="Duplicate methods"):
            BacktestConfig(methods=["mge", "mge"])

    def test_empty_methods_raises(self) -> None:
        with pytest.raises(ValueError, match="At least one method"):
            BacktestConfig(methods=[])

    @pytest.mark.parametrize(
        "field,value",
        [("repeats", 0), ("scenarios_per_day", 1), ("workers", 0), ("prob_refit_days", -1)],
    )
    def test_invalid_counts(self, field: str, value: int) -> None:
        with pytest.raises(ValueError, match=field):
            BacktestConfig(**{field: value})


class TestLoggingConfig:
    """Tests for LoggingConfig."""

    def test_trace_level_accepted(self) -> None:
        assert LoggingConfig(level="TRACE").level == "TRACE"

    def test_lowercase_level_accepted(self) -> None:
        assert LoggingConfig(level="debug").level == "debug"

    def test_invalid_level_raises(self) -> None:
        with pytest.raises(ValueError, match="Invalid log level"):
            LoggingConfig(level="VERBOSE")

    def test_expanded_file(self) -> None:
        config = LoggingConfig(file="~/logs/igep.log")
        assert not str(config.expanded_file).startswith("~")


class TestDataConfig:
    """Tests for DataConfig."""

    def test_synthetic_by_default(self) -> None:
        config = DataConfig()
        assert config.csv_path is None
        assert config.expanded_csv_path is None

    def test_expanded_csv_path(self) -> None:
        config = DataConfig(csv_path="~/data/de.csv")
        assert str(config.expanded_csv_path).endswith("data/de.csv")
        assert not str(config.expanded_csv_path).startswith("~")

    def test_output_dir_expanded(self) -> None:
        assert not str(OutputConfig(dir="~/runs").expanded_dir).startswith("~")


class TestParseConfig:
    """Tests for parse_config."""

    def test_empty_dict_gives_defaults(self) -> None:
        config = parse_config({})
        assert config == Config()

    def test_partial_sections_keep_defaults(self) -> None:
        config = parse_config(
            {
                "data": {"synthetic": {"start": "2016-01-01", "n_days": 500}},
                "split": {"test_end": "2017-06-30"},
                "igep": {"epochs": 3},
                "backtest": {"scoring": {"pair_estimator": "biased"}},
            }
        )
        assert config.data.synthetic.start == date(2016, 1, 1)
        assert config.data.synthetic.n_days == 500
        assert config.data.synthetic.seed == 0
        assert config.split.test_start == date(2017, 1, 1)
        assert config.split.test_end == date(2017, 6, 30)
        assert config.igep.epochs == 3
        assert config.igep.scenarios_per_example == 25
        assert config.backtest.scoring.pair_estimator == "biased"
        assert config.backtest.scoring.es_beta == 1.0

    def test_csv_schema_columns(self) -> None:
        config = parse_config({"data": {"csv_path": "de.csv", "schema": {"price": "da_price"}}})
        assert config.data.schema.price == "da_price"
        assert config.data.schema.load == "load_forecast"

    def test_plot_dates_parsed(self) -> None:
        config = parse_config({"backtest": {"output": {"plot_dates": ["2017-02-14"]}}})
        assert config.backtest.output.plot_dates == [date(2017, 2, 14)]

    def test_bad_date_raises(self) -> None:
        with pytest.raises(ValueError, match="Invalid test_start: '2017-13-01'"):
            parse_config({"split": {"test_start": "2017-13-01"}})


class TestLoadConfig:
    """Tests for load_config."""

    def test_missing_file_raises(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError, match="Config file not found"):
            load_config(tmp_path / "nonexistent.json")

    def test_repo_config_loads(self) -> None:
        """The shipped config parses to the documented defaults."""
        config = load_config(REPO_CONFIG_DIR / "config.json")
        assert config.backtest.repeats == 10
        assert config.backtest.scenarios_per_day == 1000
        assert len(config.backtest.methods) == 7
        assert config.igep.batch_size == 3

    def test_load_without_schema(self, tmp_path: Path) -> None:
        """Without a schema next to it the file is only checked by the dataclasses."""
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({"backtest": {"repeats": 2}}))
        assert load_config(config_file).backtest.repeats == 2

    def test_schema_violation_names_path(self, tmp_path: Path) -> None:
        shutil.copy(REPO_CONFIG_DIR / "config.schema.json", tmp_path / "config.schema.json")
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({"backtest": {"repeats": 0}}))
        with pytest.raises(ValueError, match="Config validation failed at 'backtest -> repeats'"):
            load_config(config_file)

    def test_dataclass_check_after_schema(self, tmp_path: Path) -> None:
        """Cross-field rules the schema cannot express still raise."""
        shutil.copy(REPO_CONFIG_DIR / "config.schema.json", tmp_path / "config.schema.json")
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({"split": {"test_start": "2015-06-01"}}))
        with pytest.raises(ValueError, match="Invalid split"):
            load_config(config_file)


class TestFindConfigFile:
    """Tests for find_config_file."""

    def test_finds_in_current_dir(self, tmp_path: Path) -> None:
        config_dir = tmp_path / "config"
        config_dir.mkdir()
        config_file = config_dir / "config.json"
        config_file.write_text("{}")
        assert find_config_file(tmp_path) == config_file

    def test_finds_in_parent_dir(self, tmp_path: Path) -> None:
        config_dir = tmp_path / "config"
        config_dir.mkdir()
        config_file = config_dir / "config.json"
        config_file.write_text("{}")
        subdir = tmp_path / "runs" / "today"
        subdir.mkdir(parents=True)
        assert find_config_file(subdir) == config_file

    def test_raises_when_not_found(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError, match="No config/config.json found"):
            find_config_file(tmp_path)
