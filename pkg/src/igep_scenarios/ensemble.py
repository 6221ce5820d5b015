"""Expert point-forecasting models and the rolling-window ensemble.

Five experts model the day-ahead price from the residual load (RL, in GW):

    ARX-M    asinh prices, one linear model per hour, lags 1/2/7 of price and RL
    ARX-U    same regressors pooled over hours with 24 hour dummies
    Poly-LR  cubic polynomial in RL plus hour dummies, temporally weighted
    LW-LR    local linear fit in RL per query point (temporal and RL kernel)
    GB       gradient boosted trees on RL and hour dummies, temporally weighted
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Literal, Sequence, Union

import numpy as np
import pandas as pd
import scipy.linalg
from sklearn.ensemble import GradientBoostingRegressor

from .core import HOURS, EnsembleForecast, MarketDataset, asinh_transform, sinh_inverse
from .errors import DataStructureError
from .logging_config import get_logger

logger = get_logger("ensemble")

MIN_WINDOW_DAYS = 30
WLS_JITTER = 1e-8
MIN_WEIGHT = 1e-300
RL_SCALE = 1000.0  # MW -> GW


@dataclass(frozen=True)
class LinearExpertSpec:
    """Feature layout and weighting of a linear expert.

    Feature order: intercept, RL^p for p in ``rl_powers``, price lags,
    RL lags, hour dummies H1..H24.
    """

    name: str
    target_transform: Literal["asinh", "none"] = "none"
    per_hour: bool = False
    rl_powers: tuple[int, ...] = (1,)
    price_lags: tuple[int, ...] = ()
    rl_lags: tuple[int, ...] = ()
    hour_dummies: bool = False
    intercept: bool = False
    temporal_decay: float = 0.0
    rl_distance: float = 0.0
    local: bool = False

    def __post_init__(self) -> None:
        if self.target_transform not in ("asinh", "none"):
            raise ValueError(
                f"Invalid target_transform: {self.target_transform}. Must be 'asinh' or 'none'"
            )
        if any(lag < 1 for lag in (*self.price_lags, *self.rl_lags)):
            raise ValueError(f"{self.name}: lags must refer to strictly past days (>= 1)")
        if self.temporal_decay < 0 or self.rl_distance < 0:
            raise ValueError(f"{self.name}: kernel coefficients must be non-negative")
        if self.local and self.per_hour:
            raise ValueError(f"{self.name}: a local expert is fit per query point, not per hour")

    @property
    def max_lag(self) -> int:
        return max((*self.price_lags, *self.rl_lags), default=0)

    @property
    def n_features(self) -> int:
        return (
            int(self.intercept)
            + len(self.rl_powers)
            + len(self.price_lags)
            + len(self.rl_lags)
            + (HOURS if self.hour_dummies else 0)
        )


@dataclass(frozen=True)
class GBDTSpec:
    """Gradient boosted trees on RL and hour dummies.

    ``kernel_sign`` = -1 weights recent days up; +1 reproduces the literal
    exp(+c·Δd²) kernel.
    """

    name: str = "GB"
    n_estimators: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 1
    loss: Literal["squared_error"] = "squared_error"
    temporal_decay: float = 0.01
    kernel_sign: int = -1
    random_state: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError(f"Invalid n_estimators: {self.n_estimators}. Must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"Invalid learning_rate: {self.learning_rate}. Must be in (0, 1]")
        if self.kernel_sign not in (-1, 1):
            raise ValueError(f"Invalid kernel_sign: {self.kernel_sign}. Must be -1 or 1")

    @property
    def max_lag(self) -> int:
        return 0

    @property
    def target_transform(self) -> str:
        return "none"


ExpertSpec = Union[LinearExpertSpec, GBDTSpec]

ARX_M = LinearExpertSpec(
    name="ARX-M",
    target_transform="asinh",
    per_hour=True,
    price_lags=(1, 2, 7),
    rl_lags=(1, 2, 7),
    intercept=True,
)
ARX_U = LinearExpertSpec(
    name="ARX-U",
    target_transform="asinh",
    price_lags=(1, 2, 7),
    rl_lags=(1, 2, 7),
    hour_dummies=True,
)
POLY_LR = LinearExpertSpec(
    name="Poly-LR", rl_powers=(1, 2, 3), hour_dummies=True, temporal_decay=0.01
)
LW_LR = LinearExpertSpec(
    name="LW-LR", intercept=True, temporal_decay=0.01, rl_distance=10.0, local=True
)
GB = GBDTSpec()

DEFAULT_EXPERTS: tuple[ExpertSpec, ...] = (ARX_M, ARX_U, POLY_LR, LW_LR, GB)
EXPERT_NAMES = tuple(spec.name for spec in DEFAULT_EXPERTS)


def expert_specs(names: Sequence[str] = EXPERT_NAMES, gb_kernel_sign: int = -1) -> list[ExpertSpec]:
    """Look up expert specs by name.

    Raises:
        ValueError: unknown expert name
    """
    by_name = {spec.name: spec for spec in DEFAULT_EXPERTS}
    specs: list[ExpertSpec] = []
    for name in names:
        if name not in by_name:
            raise ValueError(f"Unknown expert: {name}. Must be one of {list(by_name)}")
        spec = by_name[name]
        if isinstance(spec, GBDTSpec) and gb_kernel_sign != spec.kernel_sign:
            spec = GBDTSpec(kernel_sign=gb_kernel_sign)
        specs.append(spec)
    return specs


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


def _target(dataset: MarketDataset, transform: str) -> np.ndarray:
    return asinh_transform(dataset.price) if transform == "asinh" else dataset.price


def _residual_load_gw(dataset: MarketDataset) -> np.ndarray:
    return dataset.residual_load / RL_SCALE


def _check_history(dataset: MarketDataset, spec: ExpertSpec, rows: np.ndarray) -> None:
    if spec.max_lag == 0 or rows.size == 0:
        return
    first = int(rows.min())
    for lag in sorted({*getattr(spec, "price_lags", ()), *getattr(spec, "rl_lags", ())}, reverse=True):
        if first - lag < 0:
            raise DataStructureError(
                f"{spec.name}: missing lag {lag} (needs "
                f"{(dataset.days[0] - timedelta(days=lag - first)).isoformat()})",
                dataset.days[first],
            )


def _design(
    dataset: MarketDataset,
    spec: ExpertSpec,
    rows: np.ndarray,
    hours: np.ndarray,
) -> np.ndarray:
    """Design matrix with one row per (day row, hour) pair."""
    rows = np.asarray(rows, dtype=int)
    hours = np.asarray(hours, dtype=int)
    _check_history(dataset, spec, rows)
    rl = _residual_load_gw(dataset)
    columns: list[np.ndarray] = []

    if isinstance(spec, GBDTSpec):
        columns.append(rl[rows, hours])
        columns.extend(np.eye(HOURS)[hours].T)
        return np.column_stack(columns)

    if spec.intercept:
        columns.append(np.ones(rows.size))
    current = rl[rows, hours]
    columns.extend(current**power for power in spec.rl_powers)
    target = _target(dataset, spec.target_transform)
    columns.extend(target[rows - lag, hours] for lag in spec.price_lags)
    columns.extend(rl[rows - lag, hours] for lag in spec.rl_lags)
    if spec.hour_dummies:
        columns.extend(np.eye(HOURS)[hours].T)
    return np.column_stack(columns)


def build_features(dataset: MarketDataset, spec: ExpertSpec, day: date, hour: int) -> np.ndarray:
    """Feature vector of ``spec`` for (day, hour); hour is 0-based.

    Raises:
        DataStructureError: a lag reaches before the start of the dataset
    """
    if not 0 <= hour < HOURS:
        raise ValueError(f"hour must be in [0, {HOURS}), got {hour}")
    row = dataset.index_of(day)
    return _design(dataset, spec, np.array([row]), np.array([hour]))[0]


def temporal_log_kernel(day_offsets: np.ndarray, coefficient: float, sign: int = -1) -> np.ndarray:
    """log κ = sign · c · Δd² with Δd in days."""
    offsets = np.asarray(day_offsets, dtype=float)
    return sign * coefficient * offsets * offsets


def normalize_log_weights(log_weights: np.ndarray) -> np.ndarray:
    """exp(log κ - max log κ), floored so every weight stays positive."""
    log_weights = np.asarray(log_weights, dtype=float)
    return np.maximum(np.exp(log_weights - log_weights.max()), MIN_WEIGHT)


# ---------------------------------------------------------------------------
# Weighted least squares
# ---------------------------------------------------------------------------


def fit_wls(X: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Coefficients minimizing Σ κ_i (y_i - x_iᵀw)².

    Solved by SVD-based least squares on sqrt(κ)-scaled rows. A rank-deficient
    design falls back to the normal equations with 1e-8 diagonal jitter.

    Raises:
        ValueError: fewer rows than columns, or no finite solution
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < p:
        raise ValueError(f"WLS needs rows >= columns, got {n} rows for {p} columns")
    if weights is None:
        weights = np.ones(n)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,) or np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValueError("WLS weights must be positive, finite and one per row")

    root = np.sqrt(weights)
    A = X * root[:, None]
    b = y * root
    coef, _, rank, _ = scipy.linalg.lstsq(A, b, lapack_driver="gelsd")
    if rank < p:
        logger.warning(f"WLS design has rank {rank} < {p}; adding {WLS_JITTER} diagonal jitter")
        gram = A.T @ A + WLS_JITTER * np.eye(p)
        try:
            coef = scipy.linalg.solve(gram, A.T @ b, assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise ValueError(f"WLS design is irrecoverably rank deficient: {e}") from e
    if not np.all(np.isfinite(coef)):
        raise ValueError("WLS produced non-finite coefficients")
    return coef


# ---------------------------------------------------------------------------
# Fitting and prediction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LocalSample:
    rl: np.ndarray  # GW
    rl_mean: float
    rl_std: float
    target: np.ndarray
    day_rows: np.ndarray


@dataclass(frozen=True)
class FittedExpert:
    """An expert fitted on the window ending at ``train_end``."""

    spec: ExpertSpec
    train_end: date
    model: Any = field(repr=False)


def _training_rows(dataset: MarketDataset, start: date, end: date) -> np.ndarray:
    return np.arange(dataset.index_of(start), dataset.index_of(end) + 1)


def fit_expert(
    dataset: MarketDataset,
    spec: ExpertSpec,
    train_start: date,
    train_end: date,
) -> FittedExpert:
    """Fit one expert on ``train_start``..``train_end``.

    Temporal kernels are centered on the day after ``train_end``. Lags may
    reach before ``train_start`` but not before the start of ``dataset``.

    Raises:
        DataStructureError: window shorter than 30 days or lags unavailable
    """
    rows = _training_rows(dataset, train_start, train_end)
    if rows.size < MIN_WINDOW_DAYS:
        raise DataStructureError(
            f"{spec.name}: training window of {rows.size} days, need at least {MIN_WINDOW_DAYS}",
            train_end,
        )
    _check_history(dataset, spec, rows)
    reference_row = rows[-1] + 1
    target = _target(dataset, spec.target_transform)

    if isinstance(spec, LinearExpertSpec) and spec.local:
        rl = _residual_load_gw(dataset)[rows]
        std = float(rl.std())
        model: Any = _LocalSample(
            rl=rl,
            rl_mean=float(rl.mean()),
            rl_std=std if std > 0 else 1.0,
            target=np.array(target[rows]),
            day_rows=rows,
        )
        return FittedExpert(spec=spec, train_end=train_end, model=model)

    if isinstance(spec, LinearExpertSpec) and spec.per_hour:
        log_w = temporal_log_kernel(reference_row - rows, spec.temporal_decay)
        weights = normalize_log_weights(log_w)
        coefficients = np.array(
            [
                fit_wls(_design(dataset, spec, rows, np.full(rows.size, h)), target[rows, h], weights)
                for h in range(HOURS)
            ]
        )
        return FittedExpert(spec=spec, train_end=train_end, model=coefficients)

    pooled_rows = np.repeat(rows, HOURS)
    pooled_hours = np.tile(np.arange(HOURS), rows.size)
    X = _design(dataset, spec, pooled_rows, pooled_hours)
    y = target[pooled_rows, pooled_hours]

    if isinstance(spec, GBDTSpec):
        log_w = temporal_log_kernel(reference_row - pooled_rows, spec.temporal_decay, spec.kernel_sign)
        booster = GradientBoostingRegressor(
            loss=spec.loss,
            n_estimators=spec.n_estimators,
            learning_rate=spec.learning_rate,
            max_depth=spec.max_depth,
            min_samples_leaf=spec.min_samples_leaf,
            random_state=spec.random_state,
        )
        booster.fit(X, y, sample_weight=normalize_log_weights(log_w))
        return FittedExpert(spec=spec, train_end=train_end, model=booster)

    log_w = temporal_log_kernel(reference_row - pooled_rows, spec.temporal_decay)
    coefficients = fit_wls(X, y, normalize_log_weights(log_w))
    return FittedExpert(spec=spec, train_end=train_end, model=coefficients)


def _predict_local(fitted: FittedExpert, dataset: MarketDataset, row: int) -> np.ndarray:
    spec = fitted.spec
    sample: _LocalSample = fitted.model
    rl_query = _residual_load_gw(dataset)[row]
    z_train = (sample.rl - sample.rl_mean) / sample.rl_std
    z_query = (rl_query - sample.rl_mean) / sample.rl_std
    temporal = temporal_log_kernel(row - sample.day_rows, spec.temporal_decay)[:, None]
    X = np.column_stack([np.ones(sample.rl.size), sample.rl.ravel()])
    y = sample.target.ravel()
    prediction = np.empty(HOURS)
    for h in range(HOURS):
        log_w = temporal - spec.rl_distance * (z_query[h] - z_train) ** 2
        coef = fit_wls(X, y, normalize_log_weights(log_w.ravel()))
        prediction[h] = coef[0] + coef[1] * rl_query[h]
    return prediction


def predict_expert(fitted: FittedExpert, dataset: MarketDataset, day: date) -> np.ndarray:
    """24 price predictions for ``day`` (original price scale).

    Uses prices strictly before ``day`` and RL forecasts up to ``day``.

    Raises:
        ValueError: ``day`` is not after the training window
    """
    if day <= fitted.train_end:
        raise ValueError(
            f"{fitted.spec.name}: cannot predict {day.isoformat()} from a model trained "
            f"through {fitted.train_end.isoformat()}"
        )
    spec = fitted.spec
    row = dataset.index_of(day)
    hours = np.arange(HOURS)

    if isinstance(spec, LinearExpertSpec) and spec.local:
        prediction = _predict_local(fitted, dataset, row)
    elif isinstance(spec, GBDTSpec):
        prediction = fitted.model.predict(_design(dataset, spec, np.full(HOURS, row), hours))
    elif spec.per_hour:
        X = _design(dataset, spec, np.full(HOURS, row), hours)
        prediction = np.einsum("hp,hp->h", X, fitted.model)
    else:
        prediction = _design(dataset, spec, np.full(HOURS, row), hours) @ fitted.model

    if spec.target_transform == "asinh":
        prediction = sinh_inverse(prediction)
    return np.asarray(prediction, dtype=float)


# ---------------------------------------------------------------------------
# Rolling window
# ---------------------------------------------------------------------------


def rolling_window(
    dataset: MarketDataset,
    target_day: date,
    window_days: int,
    max_lag: int,
) -> tuple[date, date]:
    """Trailing training window for ``target_day``, clipped to days with full lags.

    Raises:
        DataStructureError: fewer than 30 usable days
    """
    row = dataset.index_of(target_day)
    first = max(row - window_days, max_lag)
    if row - first < MIN_WINDOW_DAYS:
        raise DataStructureError(
            f"only {max(row - first, 0)} training days with {max_lag}-day lags before "
            f"the target day, need at least {MIN_WINDOW_DAYS}",
            target_day,
        )
    return dataset.days[first], dataset.days[row - 1]


def rolling_forecast(
    dataset: MarketDataset,
    specs: Sequence[ExpertSpec],
    start: date,
    end: date,
    window_days: int = 365,
    refit_every_days: int = 1,
) -> list[EnsembleForecast]:
    """Out-of-sample ensemble forecasts for every day in ``start``..``end``.

    Each expert is refit on the trailing window every ``refit_every_days``
    target days (1 = daily re-estimation).

    Raises:
        DataStructureError: days outside the dataset or too little history
    """
    if refit_every_days < 1:
        raise ValueError(f"Invalid refit_every_days: {refit_every_days}. Must be >= 1")
    if end < start:
        raise ValueError(f"end {end.isoformat()} is before start {start.isoformat()}")
    dataset.index_of(end)
    names = tuple(spec.name for spec in specs)
    max_lag = max(spec.max_lag for spec in specs)
    n_days = (end - start).days + 1
    logger.info(
        f"Rolling forecasts for {n_days} days ({start} .. {end}), experts={list(names)}, "
        f"window={window_days}, refit every {refit_every_days} day(s)"
    )

    fitted: list[FittedExpert] = []
    forecasts: list[EnsembleForecast] = []
    for k in range(n_days):
        day = start + timedelta(days=k)
        if k % refit_every_days == 0:
            train_start, train_end = rolling_window(dataset, day, window_days, max_lag)
            fitted = [fit_expert(dataset, spec, train_start, train_end) for spec in specs]
        values = np.column_stack([predict_expert(f, dataset, day) for f in fitted])
        forecasts.append(EnsembleForecast(day=day, values=values, model_names=names))
        logger.debug(f"Ensemble forecast {day}: mean {values.mean():.3f}")
    logger.info(f"Produced {len(forecasts)} ensemble forecasts")
    return forecasts


# ---------------------------------------------------------------------------
# Exchange format and point-forecast report
# ---------------------------------------------------------------------------


def write_ensemble_csv(
    forecasts: Sequence[EnsembleForecast],
    actuals: np.ndarray,
    path: Path,
) -> Path:
    """Columns: date, hour (1..24), one per expert, avg, actual_price."""
    if not forecasts:
        raise ValueError("no ensemble forecasts to write")
    actuals = np.asarray(actuals, dtype=float)
    names = forecasts[0].model_names
    frames = []
    for forecast, actual in zip(forecasts, actuals, strict=True):
        frame = pd.DataFrame(forecast.values, columns=list(names))
        frame.insert(0, "hour", np.arange(1, HOURS + 1))
        frame.insert(0, "date", forecast.day.isoformat())
        frame["avg"] = forecast.average
        frame["actual_price"] = actual
        frames.append(frame)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {len(forecasts)} days of ensemble forecasts to {path}")
    return path


def read_ensemble_csv(path: Path) -> tuple[list[EnsembleForecast], np.ndarray]:
    """Read forecasts and the N×24 realized prices back from ``write_ensemble_csv`` output.

    Raises:
        DataStructureError: a day without 24 rows
    """
    frame = pd.read_csv(path, dtype={"date": str}, float_precision="round_trip")
    fixed = {"date", "hour", "avg", "actual_price"}
    names = tuple(c for c in frame.columns if c not in fixed)
    forecasts: list[EnsembleForecast] = []
    actuals: list[np.ndarray] = []
    for day_str, group in frame.groupby("date", sort=True):
        day = date.fromisoformat(str(day_str))
        group = group.sort_values("hour")
        if len(group) != HOURS:
            raise DataStructureError(f"expected {HOURS} forecast rows, found {len(group)}", day)
        forecasts.append(
            EnsembleForecast(day=day, values=group[list(names)].to_numpy(float), model_names=names)
        )
        actuals.append(group["actual_price"].to_numpy(float))
    return forecasts, np.array(actuals)


@dataclass(frozen=True)
class PointReport:
    """MAE and RMSE per expert and for the ensemble average (AVG)."""

    names: tuple[str, ...]
    mae: dict[str, float]
    rmse: dict[str, float]

    @property
    def best_member(self) -> str:
        members = [n for n in self.names if n != "AVG"]
        return min(members, key=lambda n: self.mae[n])

    def improvement_pct(self, metric: Literal["mae", "rmse"] = "mae") -> float:
        """Relative improvement of AVG over the best member (positive = AVG better)."""
        scores = getattr(self, metric)
        best = min(scores[n] for n in self.names if n != "AVG")
        return 100.0 * (best - scores["AVG"]) / best


def point_report(forecasts: Sequence[EnsembleForecast], actuals: np.ndarray) -> PointReport:
    """Out-of-sample errors of every member and of the AVG combination."""
    stacked = np.array([f.values for f in forecasts])  # N × 24 × M
    actuals = np.asarray(actuals, dtype=float)
    names = forecasts[0].model_names
    columns = {name: stacked[:, :, m] for m, name in enumerate(names)}
    columns["AVG"] = stacked.mean(axis=2)
    mae = {n: float(np.mean(np.abs(p - actuals))) for n, p in columns.items()}
    rmse = {n: float(np.sqrt(np.mean((p - actuals) ** 2))) for n, p in columns.items()}
    report = PointReport(names=tuple(columns), mae=mae, rmse=rmse)
    logger.info(
        f"AVG MAE {mae['AVG']:.3f} vs best member {report.best_member} "
        f"{mae[report.best_member]:.3f} ({report.improvement_pct():+.1f}%)"
    )
    return report
