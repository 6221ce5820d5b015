"""Domain data model shared by all modules.

Everything here is immutable after construction: arrays are copied and marked
read-only, so datasets, forecasts and scenario sets can be handed to worker
threads without locking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import DataParseError, DataStructureError
from .logging_config import get_logger

logger = get_logger("core")

HOURS = 24


def _frozen(values: object, dtype: type = float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


def asinh_transform(y: np.ndarray | float) -> np.ndarray | float:
    """Variance-stabilizing transform applied to prices (no prior centering)."""
    return np.arcsinh(y)


def sinh_inverse(y_tilde: np.ndarray | float) -> np.ndarray | float:
    """Inverse of ``asinh_transform``."""
    return np.sinh(y_tilde)


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for market CSV files."""

    timestamp: str = "timestamp"
    price: str = "price"
    load: str = "load_forecast"
    wind: str = "wind_forecast"
    pv: str = "solar_forecast"

    @property
    def value_columns(self) -> dict[str, str]:
        """Dataset field name → CSV column name."""
        return {"price": self.price, "load": self.load, "wind": self.wind, "pv": self.pv}


@dataclass(frozen=True)
class MarketDataset:
    """Day × hour panel of prices and exogenous forecasts.

    ``residual_load`` is derived as ``load - wind - pv`` on construction and is
    not an init argument.
    """

    days: tuple[date, ...]
    price: np.ndarray
    load: np.ndarray
    wind: np.ndarray
    pv: np.ndarray
    residual_load: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        days = tuple(self.days)
        if not days:
            raise DataStructureError("dataset has no days")
        for prev, cur in zip(days, days[1:]):
            if cur - prev != timedelta(days=1):
                raise DataStructureError(
                    f"days are not contiguous (previous day {prev.isoformat()})", cur
                )
        object.__setattr__(self, "days", days)
        for name in ("price", "load", "wind", "pv"):
            array = _frozen(getattr(self, name))
            if array.shape != (len(days), HOURS):
                raise DataStructureError(
                    f"{name} has shape {array.shape}, expected ({len(days)}, {HOURS})"
                )
            if not np.all(np.isfinite(array)):
                row = int(np.argwhere(~np.isfinite(array))[0, 0])
                raise DataStructureError(f"non-finite {name} value", days[row])
            object.__setattr__(self, name, array)
        object.__setattr__(self, "residual_load", _frozen(self.load - self.wind - self.pv))

    @property
    def n_days(self) -> int:
        return len(self.days)

    def index_of(self, day: date) -> int:
        """Row index of a calendar day."""
        offset = (day - self.days[0]).days
        if offset < 0 or offset >= self.n_days:
            raise DataStructureError("day outside dataset range", day)
        return offset

    def window(self, start: date, end: date) -> MarketDataset:
        """Sub-dataset covering ``start``..``end`` inclusive."""
        lo, hi = self.index_of(start), self.index_of(end) + 1
        return MarketDataset(
            days=self.days[lo:hi],
            price=self.price[lo:hi],
            load=self.load[lo:hi],
            wind=self.wind[lo:hi],
            pv=self.pv[lo:hi],
        )

    def with_prices(self, price: np.ndarray) -> MarketDataset:
        """Copy with a replaced price panel."""
        return MarketDataset(days=self.days, price=price, load=self.load, wind=self.wind, pv=self.pv)

    def to_frame(self, schema: CsvSchema | None = None) -> pd.DataFrame:
        """Long hourly frame in the CSV exchange format."""
        schema = schema or CsvSchema()
        start = pd.Timestamp(self.days[0])
        stamps = pd.date_range(start, periods=self.n_days * HOURS, freq="h")
        return pd.DataFrame(
            {
                schema.timestamp: stamps.strftime("%Y-%m-%dT%H:%M:%S"),
                schema.price: self.price.ravel(),
                schema.load: self.load.ravel(),
                schema.wind: self.wind.ravel(),
                schema.pv: self.pv.ravel(),
            }
        )

    def write_csv(self, path: Path, schema: CsvSchema | None = None) -> Path:
        """Write the dataset in the CSV exchange format."""
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame(schema).to_csv(path, index=False, float_format="%.17g")
        return path


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return np.nan


def _parse_numeric(raw: pd.Series, column: str) -> np.ndarray:
    # float() is correctly rounded; pd.to_numeric is not
    values = raw.str.strip().map(_to_float).to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        # +2: one header line, 1-based numbering
        raise DataParseError(f"invalid {column} value {raw.iloc[row]!r}", line=row + 2)
    return values


def ingest_csv(
    path: str | Path,
    schema: CsvSchema | None = None,
    fill_missing: bool = False,
) -> MarketDataset:
    """Load an hourly market CSV into a ``MarketDataset``.

    Timestamps are read as local wall-clock time; any UTC offset suffix is
    ignored. Days without exactly 24 hourly records are rejected unless
    ``fill_missing`` is set, in which case missing hours are forward-filled
    (back-filled at the very start) and duplicate hours keep the first record.

    Raises:
        DataParseError: malformed row (message carries the line number)
        DataStructureError: incomplete day (message names the date)
    """
    schema = schema or CsvSchema()
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)

    required = [schema.timestamp, *schema.value_columns.values()]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataParseError(f"missing columns {missing} in {path}", line=1)
    if frame.empty:
        raise DataStructureError(f"no records in {path}")

    raw_ts = frame[schema.timestamp].str.strip()
    stamps = pd.to_datetime(raw_ts.str.slice(0, 19), format="ISO8601", errors="coerce")
    bad = stamps.isna() | (stamps.dt.minute != 0) | (stamps.dt.second != 0)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataParseError(f"invalid hourly timestamp {raw_ts.iloc[row]!r}", line=row + 2)

    columns = {
        name: _parse_numeric(frame[col], col) for name, col in schema.value_columns.items()
    }
    table = pd.DataFrame(columns, index=pd.DatetimeIndex(stamps))

    duplicated = table.index.duplicated(keep="first")
    if duplicated.any():
        first = table.index[duplicated][0].date()
        if not fill_missing:
            raise DataStructureError("duplicate hourly records", first)
        logger.warning(f"Dropping {int(duplicated.sum())} duplicate hourly records")
        table = table[~duplicated]
    table = table.sort_index()

    first_day = table.index[0].normalize()
    last_day = table.index[-1].normalize()
    full_index = pd.date_range(first_day, last_day + pd.Timedelta(hours=HOURS - 1), freq="h")
    counts = table.groupby(table.index.normalize()).size().reindex(
        pd.date_range(first_day, last_day, freq="D"), fill_value=0
    )
    incomplete = counts[counts != HOURS]
    if len(incomplete):
        if not fill_missing:
            day = incomplete.index[0].date()
            raise DataStructureError(
                f"expected {HOURS} hourly records, found {int(incomplete.iloc[0])}", day
            )
        logger.warning(f"Forward-filling {len(incomplete)} incomplete days")
    table = table.reindex(full_index).ffill().bfill()

    n_days = len(full_index) // HOURS
    days = tuple(d.date() for d in pd.date_range(first_day, periods=n_days, freq="D"))
    dataset = MarketDataset(
        days=days,
        **{name: table[name].to_numpy().reshape(n_days, HOURS) for name in columns},
    )
    logger.info(f"Ingested {path.name}: {n_days} days, {n_days * HOURS} records")
    return dataset


@dataclass(frozen=True)
class Standardizer:
    """Pooled scalar location/scale of training-set prices."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mean) and np.isfinite(self.std)):
            raise ValueError("Standardizer mean and std must be finite")
        if self.std <= 0:
            raise ValueError(f"Standardizer std must be positive, got {self.std}")

    def apply(self, values: np.ndarray | float) -> np.ndarray | float:
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values: np.ndarray | float) -> np.ndarray | float:
        return np.asarray(values, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict[str, float]:
        return {"mean": float(self.mean), "std": float(self.std)}

    @classmethod
    def from_dict(cls, data: dict[str, float]) -> Standardizer:
        return cls(mean=float(data["mean"]), std=float(data["std"]))


def fit_standardizer(prices: np.ndarray | Sequence[float]) -> Standardizer:
    """Pooled mean and population standard deviation over all values.

    Raises:
        ValueError: fewer than two values, or zero variance
    """
    values = np.asarray(prices, dtype=float).ravel()
    if values.size < 2:
        raise ValueError(f"need at least 2 values to standardize, got {values.size}")
    std = float(values.std(ddof=0))
    if std == 0.0:
        raise ValueError("cannot standardize a constant series (zero variance)")
    return Standardizer(mean=float(values.mean()), std=std)


@dataclass(frozen=True)
class EnsembleForecast:
    """Point forecasts of M expert models for the D=24 hours of one day."""

    day: date
    values: np.ndarray
    model_names: tuple[str, ...]

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        names = tuple(self.model_names)
        if values.ndim != 2 or values.shape[0] != HOURS:
            raise ValueError(f"ensemble values must be {HOURS}×M, got {values.shape}")
        if values.shape[1] < 2:
            raise ValueError("ensemble needs at least 2 members")
        if len(names) != values.shape[1]:
            raise ValueError(f"{len(names)} model names for {values.shape[1]} members")
        if not np.all(np.isfinite(values)):
            raise DataStructureError("non-finite ensemble forecast", self.day)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "model_names", names)

    @property
    def n_members(self) -> int:
        return self.values.shape[1]

    @property
    def average(self) -> np.ndarray:
        """Ensemble mean per hour (the AVG forecast)."""
        return self.values.mean(axis=1)

    @property
    def spread(self) -> np.ndarray:
        """Population standard deviation over members per hour."""
        return self.values.std(axis=1, ddof=0)

    @property
    def half_range(self) -> np.ndarray:
        return (self.values.max(axis=1) - self.values.min(axis=1)) / 2.0

    def standardized(self, standardizer: Standardizer) -> EnsembleForecast:
        return EnsembleForecast(
            day=self.day, values=standardizer.apply(self.values), model_names=self.model_names
        )


@dataclass(frozen=True)
class ScenarioSet:
    """S joint scenarios (rows) of the D-dimensional price vector for one day."""

    day: date
    scenarios: np.ndarray

    def __post_init__(self) -> None:
        scenarios = _frozen(self.scenarios)
        if scenarios.ndim != 2 or scenarios.shape[0] < 1:
            raise ValueError(f"scenarios must be an S×D matrix with S ≥ 1, got {scenarios.shape}")
        if not np.all(np.isfinite(scenarios)):
            raise DataStructureError("non-finite scenario values", self.day)
        object.__setattr__(self, "scenarios", scenarios)

    @property
    def n_scenarios(self) -> int:
        return self.scenarios.shape[0]

    @property
    def dimension(self) -> int:
        return self.scenarios.shape[1]

    def mean(self) -> np.ndarray:
        return self.scenarios.mean(axis=0)

    def hourly_range(self) -> np.ndarray:
        """Per-hour max minus min over scenarios."""
        return self.scenarios.max(axis=0) - self.scenarios.min(axis=0)


def hour_columns(dimension: int = HOURS) -> list[str]:
    return [f"h{h:02d}" for h in range(1, dimension + 1)]


def write_scenarios_csv(scenario_set: ScenarioSet, path: Path) -> Path:
    """One row per scenario, columns h01..hD, full float precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(scenario_set.scenarios, columns=hour_columns(scenario_set.dimension))
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def read_scenarios_csv(path: Path, day: date | None = None) -> ScenarioSet:
    """Read a scenario CSV; the day defaults to the file stem (ISO date)."""
    frame = pd.read_csv(path, float_precision="round_trip")
    if day is None:
        day = date.fromisoformat(Path(path).stem)
    return ScenarioSet(day=day, scenarios=frame.to_numpy(dtype=float))
