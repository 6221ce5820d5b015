"""Synthetic day-ahead market data.

Load, wind and PV forecasts follow calendar shapes with random daily
drivers. The price is a sinh-shaped merit-order function of the realized
residual load plus calendar and fuel effects. The realized residual load
deviates from its forecast by an error whose size grows with the wind
forecast, and the merit-order curve amplifies that error where it is steep.
The resulting price noise is heteroscedastic, and the expert models disagree
most in the same steep regions, so ensemble spread carries information about
forecast uncertainty.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from datetime import date, timedelta
from typing import Any

import numpy as np

from .core import HOURS, MarketDataset
from .logging_config import get_logger

logger = get_logger("synthetic")


@dataclass(frozen=True)
class SyntheticConfig:
    """Regime parameters of the synthetic market (MW and EUR/MWh)."""

    start: date = date(2015, 1, 1)
    n_days: int = 1096
    seed: int = 0
    noise_scale: float = 1.0

    load_base: float = 55000.0
    load_annual_amplitude: float = 0.12
    load_daily_amplitude: float = 0.35
    weekend_factor: float = 0.85

    wind_capacity: float = 40000.0
    wind_mean_factor: float = 0.25
    wind_persistence: float = 0.8
    wind_volatility: float = 0.12

    pv_capacity: float = 35000.0

    rl_error_base: float = 800.0
    rl_error_per_wind: float = 0.12
    rl_error_day_correlation: float = 0.8

    price_base: float = 35.0
    merit_mid_gw: float = 40.0
    merit_scale_gw: float = 14.0
    merit_slope: float = 1.3
    weekend_discount: float = 3.0
    fuel_volatility: float = 0.4
    price_noise: float = 1.0

    def __post_init__(self) -> None:
        if self.n_days < 1:
            raise ValueError(f"Invalid n_days: {self.n_days}. Must be >= 1")
        if self.noise_scale < 0:
            raise ValueError(f"Invalid noise_scale: {self.noise_scale}. Must be >= 0")
        if not 0.0 <= self.wind_persistence < 1.0:
            raise ValueError(
                f"Invalid wind_persistence: {self.wind_persistence}. Must be in [0, 1)"
            )
        if not 0.0 <= self.rl_error_day_correlation <= 1.0:
            raise ValueError(
                f"Invalid rl_error_day_correlation: {self.rl_error_day_correlation}. "
                "Must be in [0, 1]"
            )
        if self.merit_scale_gw <= 0:
            raise ValueError(f"Invalid merit_scale_gw: {self.merit_scale_gw}. Must be > 0")

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["start"] = self.start.isoformat()
        return data


def merit_order_price(rl_gw: np.ndarray, cfg: SyntheticConfig) -> np.ndarray:
    """Price contribution of the residual load (sinh-shaped supply curve)."""
    scale = cfg.merit_scale_gw
    return cfg.merit_slope * scale * np.sinh((np.asarray(rl_gw) - cfg.merit_mid_gw) / scale)


def _calendar(cfg: SyntheticConfig) -> tuple[tuple[date, ...], np.ndarray, np.ndarray]:
    days = tuple(cfg.start + timedelta(days=k) for k in range(cfg.n_days))
    day_of_year = np.array([d.timetuple().tm_yday for d in days], dtype=float)
    weekend = np.array([d.weekday() >= 5 for d in days])
    return days, day_of_year, weekend


def _load(cfg: SyntheticConfig, day_of_year: np.ndarray, weekend: np.ndarray) -> np.ndarray:
    hours = np.arange(HOURS) + 0.5
    daily_shape = 0.5 * (1.0 - np.cos(2.0 * np.pi * (hours - 4.0) / HOURS))
    annual = 1.0 + cfg.load_annual_amplitude * np.cos(2.0 * np.pi * (day_of_year - 15.0) / 365.25)
    weekly = np.where(weekend, cfg.weekend_factor, 1.0)
    shape = (1.0 - cfg.load_daily_amplitude / 2.0) + cfg.load_daily_amplitude * daily_shape
    return cfg.load_base * (annual * weekly)[:, None] * shape[None, :]


def _wind(cfg: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    factors = np.empty(cfg.n_days + 1)
    factors[0] = cfg.wind_mean_factor
    shocks = rng.standard_normal(cfg.n_days)
    for k in range(cfg.n_days):
        drift = cfg.wind_persistence * factors[k] + (1 - cfg.wind_persistence) * cfg.wind_mean_factor
        factors[k + 1] = np.clip(drift + cfg.wind_volatility * shocks[k], 0.02, 0.95)
    # linear interpolation between consecutive daily levels
    weight = (np.arange(HOURS) + 0.5) / HOURS
    hourly = factors[:-1, None] * (1.0 - weight) + factors[1:, None] * weight
    return cfg.wind_capacity * hourly


def _pv(cfg: SyntheticConfig, day_of_year: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    day_length = 12.0 + 4.0 * np.cos(2.0 * np.pi * (day_of_year - 172.0) / 365.25)
    sunrise = 12.5 - day_length / 2.0
    hours = np.arange(HOURS) + 0.5
    phase = (hours[None, :] - sunrise[:, None]) / day_length[:, None]
    bell = np.where((phase > 0) & (phase < 1), np.sin(np.pi * np.clip(phase, 0, 1)), 0.0)
    peak = 0.45 + 0.25 * np.cos(2.0 * np.pi * (day_of_year - 172.0) / 365.25)
    clearness = rng.uniform(0.3, 1.0, cfg.n_days)
    return cfg.pv_capacity * (peak * clearness)[:, None] * bell


def generate_synthetic(cfg: SyntheticConfig | None = None, seed: int | None = None) -> MarketDataset:
    """Generate a market dataset; identical (cfg, seed) give identical data.

    ``seed`` overrides ``cfg.seed``. With ``noise_scale = 0`` the price is an
    exact function of the residual-load forecast and the calendar.
    """
    cfg = cfg or SyntheticConfig()
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    days, day_of_year, weekend = _calendar(cfg)

    load = _load(cfg, day_of_year, weekend)
    wind = _wind(cfg, rng)
    pv = _pv(cfg, day_of_year, rng)
    rl_forecast = load - wind - pv

    # hour-to-hour error correlation within a day is rho; sd grows with wind
    rho = cfg.rl_error_day_correlation
    daily_shock = rng.standard_normal((cfg.n_days, 1))
    hourly_shock = rng.standard_normal((cfg.n_days, HOURS))
    error_sd = cfg.rl_error_base + cfg.rl_error_per_wind * wind
    rl_error = error_sd * (np.sqrt(rho) * daily_shock + np.sqrt(1.0 - rho) * hourly_shock)
    rl_realized = rl_forecast + cfg.noise_scale * rl_error

    fuel = np.cumsum(cfg.fuel_volatility * rng.standard_normal(cfg.n_days))
    price_noise = cfg.price_noise * rng.standard_normal((cfg.n_days, HOURS))

    price = (
        cfg.price_base
        + merit_order_price(rl_realized / 1000.0, cfg)
        - cfg.weekend_discount * weekend[:, None]
        + cfg.noise_scale * (fuel[:, None] + price_noise)
    )
    dataset = MarketDataset(days=days, price=price, load=load, wind=wind, pv=pv)
    logger.info(
        f"Generated synthetic market: {cfg.n_days} days from {cfg.start}, "
        f"price mean {price.mean():.2f} sd {price.std():.2f}"
    )
    return dataset
