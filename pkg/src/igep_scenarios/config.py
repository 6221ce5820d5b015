"""Configuration schema and loader for igep-scenarios."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any

import jsonschema

from .core import CsvSchema
from .ensemble import EXPERT_NAMES
from .igep import TrainConfig
from .methods import METHOD_NAMES
from .paths import expand_path
from .scoring import ScoringConfig
from .synthetic import SyntheticConfig


@dataclass
class DataConfig:
    """Where the market data comes from.

    ``csv_path`` = None generates the synthetic market instead of reading a file.
    """

    csv_path: str | None = None
    fill_missing: bool = False
    schema: CsvSchema = field(default_factory=CsvSchema)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)

    @property
    def expanded_csv_path(self) -> Path | None:
        """Return CSV path with ~ and ${VAR} expanded."""
        if self.csv_path is None:
            return None
        return Path(expand_path(self.csv_path))


@dataclass
class SplitConfig:
    """Ensemble-train / probabilistic-train / test periods (inclusive)."""

    ensemble_train_start: date = date(2015, 1, 1)
    prob_train_start: date = date(2016, 1, 1)
    test_start: date = date(2017, 1, 1)
    test_end: date = date(2017, 12, 31)

    def __post_init__(self) -> None:
        if not (
            self.ensemble_train_start < self.prob_train_start < self.test_start <= self.test_end
        ):
            raise ValueError(
                "Invalid split: need ensemble_train_start < prob_train_start < "
                f"test_start <= test_end, got {self.ensemble_train_start}, "
                f"{self.prob_train_start}, {self.test_start}, {self.test_end}"
            )

    @property
    def prob_train_days(self) -> int:
        return (self.test_start - self.prob_train_start).days

    @property
    def test_days(self) -> int:
        return (self.test_end - self.test_start).days + 1


@dataclass
class EnsembleConfig:
    """Rolling-window settings of the expert ensemble."""

    window_days: int = 365
    refit_every_days: int = 1
    experts: list[str] = field(default_factory=lambda: list(EXPERT_NAMES))
    gb_kernel_sign: int = -1

    def __post_init__(self) -> None:
        if self.window_days < 30:
            raise ValueError(f"Invalid window_days: {self.window_days}. Must be >= 30")
        if self.refit_every_days < 1:
            raise ValueError(f"Invalid refit_every_days: {self.refit_every_days}. Must be >= 1")
        unknown = [e for e in self.experts if e not in EXPERT_NAMES]
        if unknown:
            raise ValueError(f"Unknown experts: {unknown}. Must be from {list(EXPERT_NAMES)}")
        if len(self.experts) < 2:
            raise ValueError("An ensemble needs at least 2 experts")
        if self.gb_kernel_sign not in (-1, 1):
            raise ValueError(f"Invalid gb_kernel_sign: {self.gb_kernel_sign}. Must be -1 or 1")


@dataclass
class OutputConfig:
    """Run artifacts.

    An empty ``plot_dates`` plots the test days with the widest and the
    narrowest mean ensemble half-range.
    """

    dir: str = "out"
    save_scenarios: bool = True
    plot_dates: list[date] = field(default_factory=list)

    @property
    def expanded_dir(self) -> Path:
        """Return output directory with ~ and ${VAR} expanded."""
        return Path(expand_path(self.dir))


@dataclass
class BacktestConfig:
    """Methods, repeats and seeds of the evaluation."""

    methods: list[str] = field(default_factory=lambda: list(METHOD_NAMES))
    scenarios_per_day: int = 1000
    repeats: int = 10
    base_seed: int = 0
    seeds: list[int] | None = None
    workers: int = 1
    prob_refit_days: int = 0
    output: OutputConfig = field(default_factory=OutputConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    def __post_init__(self) -> None:
        unknown = [m for m in self.methods if m not in METHOD_NAMES]
        if unknown:
            raise ValueError(f"Unknown methods: {unknown}. Must be from {list(METHOD_NAMES)}")
        if not self.methods:
            raise ValueError("At least one method must be selected")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"Duplicate methods in {self.methods}")
        if self.repeats < 1:
            raise ValueError(f"Invalid repeats: {self.repeats}. Must be >= 1")
        if self.scenarios_per_day < 2:
            raise ValueError(
                f"Invalid scenarios_per_day: {self.scenarios_per_day}. Must be >= 2"
            )
        if self.seeds is not None and len(self.seeds) < self.repeats:
            raise ValueError(f"{len(self.seeds)} seeds given for {self.repeats} repeats")
        if self.workers < 1:
            raise ValueError(f"Invalid workers: {self.workers}. Must be >= 1")
        if self.prob_refit_days < 0:
            raise ValueError(f"Invalid prob_refit_days: {self.prob_refit_days}. Must be >= 0")

    def seed_for(self, repeat: int) -> int:
        """Seed of repeat ``repeat``: the explicit list if given, else base_seed + repeat."""
        if self.seeds is not None:
            return int(self.seeds[repeat])
        return self.base_seed + repeat


@dataclass
class LoggingConfig:
    """Configuration for logging. An empty ``file`` disables the log file."""

    level: str = "INFO"
    file: str = ""
    max_bytes: int = 10485760  # 10MB
    backup_count: int = 3

    @property
    def expanded_file(self) -> Path:
        """Return log file path with ~ and ${VAR} expanded."""
        return Path(expand_path(self.file))

    def __post_init__(self) -> None:
        valid_levels = ("TRACE", "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
        if self.level.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {self.level}. Must be one of {valid_levels}")


@dataclass
class Config:
    """Root configuration object."""

    data: DataConfig = field(default_factory=DataConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    igep: TrainConfig = field(default_factory=TrainConfig)
    backtest: BacktestConfig = field(default_factory=BacktestConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


def _parse_date(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except (TypeError, ValueError):
        raise ValueError(f"Invalid {name}: {value!r}. Must be an ISO date (YYYY-MM-DD)") from None


def _parse_synthetic_config(data: dict[str, Any] | None) -> SyntheticConfig:
    """Parse synthetic-market configuration; unspecified parameters keep defaults."""
    if data is None:
        return SyntheticConfig()
    values = dict(data)
    if "start" in values:
        values["start"] = _parse_date(values["start"], "synthetic.start")
    return SyntheticConfig(**values)


def _parse_data_config(data: dict[str, Any] | None) -> DataConfig:
    """Parse data configuration from dict."""
    if data is None:
        return DataConfig()
    schema = data.get("schema", {})
    return DataConfig(
        csv_path=data.get("csv_path"),
        fill_missing=data.get("fill_missing", False),
        schema=CsvSchema(
            timestamp=schema.get("timestamp", "timestamp"),
            price=schema.get("price", "price"),
            load=schema.get("load", "load_forecast"),
            wind=schema.get("wind", "wind_forecast"),
            pv=schema.get("pv", "solar_forecast"),
        ),
        synthetic=_parse_synthetic_config(data.get("synthetic")),
    )


def _parse_split_config(data: dict[str, Any] | None) -> SplitConfig:
    """Parse split dates from dict."""
    if data is None:
        return SplitConfig()
    defaults = SplitConfig()
    return SplitConfig(
        **{
            name: _parse_date(data[name], name) if name in data else getattr(defaults, name)
            for name in ("ensemble_train_start", "prob_train_start", "test_start", "test_end")
        }
    )


def _parse_ensemble_config(data: dict[str, Any] | None) -> EnsembleConfig:
    """Parse ensemble configuration from dict."""
    if data is None:
        return EnsembleConfig()
    return EnsembleConfig(
        window_days=data.get("window_days", 365),
        refit_every_days=data.get("refit_every_days", 1),
        experts=data.get("experts", list(EXPERT_NAMES)),
        gb_kernel_sign=data.get("gb_kernel_sign", -1),
    )


def _parse_igep_config(data: dict[str, Any] | None) -> TrainConfig:
    """Parse IGEP training configuration from dict."""
    if data is None:
        return TrainConfig()
    return TrainConfig(**data)


def _parse_output_config(data: dict[str, Any] | None) -> OutputConfig:
    """Parse output configuration from dict."""
    if data is None:
        return OutputConfig()
    return OutputConfig(
        dir=data.get("dir", "out"),
        save_scenarios=data.get("save_scenarios", True),
        plot_dates=[_parse_date(d, "plot_dates") for d in data.get("plot_dates", [])],
    )


def _parse_backtest_config(data: dict[str, Any] | None) -> BacktestConfig:
    """Parse backtest configuration from dict."""
    if data is None:
        return BacktestConfig()
    scoring = data.get("scoring", {})
    return BacktestConfig(
        methods=data.get("methods", list(METHOD_NAMES)),
        scenarios_per_day=data.get("scenarios_per_day", 1000),
        repeats=data.get("repeats", 10),
        base_seed=data.get("base_seed", 0),
        seeds=data.get("seeds"),
        workers=data.get("workers", 1),
        prob_refit_days=data.get("prob_refit_days", 0),
        output=_parse_output_config(data.get("output")),
        scoring=ScoringConfig(
            es_beta=scoring.get("es_beta", 1.0),
            pair_estimator=scoring.get("pair_estimator", "unbiased"),
        ),
    )


def _parse_logging_config(data: dict[str, Any] | None) -> LoggingConfig:
    """Parse logging configuration from dict."""
    if data is None:
        return LoggingConfig()
    return LoggingConfig(
        level=data.get("level", "INFO"),
        file=data.get("file", ""),
        max_bytes=data.get("max_bytes", 10485760),
        backup_count=data.get("backup_count", 3),
    )


def parse_config(data: dict[str, Any]) -> Config:
    """Build a Config from an already validated dict."""
    return Config(
        data=_parse_data_config(data.get("data")),
        split=_parse_split_config(data.get("split")),
        ensemble=_parse_ensemble_config(data.get("ensemble")),
        igep=_parse_igep_config(data.get("igep")),
        backtest=_parse_backtest_config(data.get("backtest")),
        logging=_parse_logging_config(data.get("logging")),
    )


def _load_schema(config_path: Path) -> dict[str, Any] | None:
    """Load JSON schema from config directory.

    Args:
        config_path: Path to config.json file

    Returns:
        Schema dict if found, None otherwise
    """
    schema_path = config_path.parent / "config.schema.json"
    if schema_path.exists():
        with open(schema_path) as f:
            return json.load(f)
    return None


def _validate_schema(data: dict[str, Any], schema: dict[str, Any]) -> None:
    """Validate config data against JSON schema.

    Raises:
        ValueError: If validation fails
    """
    try:
        jsonschema.validate(data, schema, cls=jsonschema.Draft7Validator)
    except jsonschema.ValidationError as e:
        path = " -> ".join(str(p) for p in e.absolute_path) if e.absolute_path else "root"
        raise ValueError(
            f"Config validation failed at '{path}':\n"
            f"  {e.message}\n"
            f"  Schema path: {' -> '.join(str(p) for p in e.absolute_schema_path)}"
        ) from None


def load_config(config_path: str | Path) -> Config:
    """Load configuration from a JSON file.

    Args:
        config_path: Path to the config.json file

    Returns:
        Parsed Config object

    Raises:
        FileNotFoundError: If config file doesn't exist
        json.JSONDecodeError: If config file is invalid JSON
        ValueError: If config fails schema validation or dataclass checks
    """
    config_path = Path(config_path)

    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path) as f:
        data = json.load(f)

    schema = _load_schema(config_path)
    if schema:
        _validate_schema(data, schema)

    return parse_config(data)


def find_config_file(start_path: Path | None = None) -> Path:
    """Find config/config.json in current directory or parent directories.

    Args:
        start_path: Starting directory (defaults to current working directory)

    Returns:
        Path to config/config.json

    Raises:
        FileNotFoundError: If no config/config.json found
    """
    if start_path is None:
        start_path = Path.cwd()

    current = start_path
    while current != current.parent:
        config_path = current / "config" / "config.json"
        if config_path.exists():
            return config_path
        current = current.parent

    config_path = current / "config" / "config.json"
    if config_path.exists():
        return config_path

    raise FileNotFoundError("No config/config.json found in current directory or parents")
