"""Shared fixtures: small synthetic markets, ensemble forecasts and configs."""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from igep_scenarios.config import (
    BacktestConfig,
    Config,
    DataConfig,
    EnsembleConfig,
    LoggingConfig,
    OutputConfig,
    SplitConfig,
)
from igep_scenarios.core import HOURS, EnsembleForecast, MarketDataset
from igep_scenarios.igep import TrainConfig
from igep_scenarios.synthetic import SyntheticConfig, generate_synthetic

START = date(2015, 1, 1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def small_market() -> MarketDataset:
    """110 synthetic days starting 2015-01-01."""
    return generate_synthetic(SyntheticConfig(start=START, n_days=110, seed=3))


@pytest.fixture
def make_forecasts() -> Callable[..., tuple[list[EnsembleForecast], np.ndarray]]:
    """Factory for heteroscedastic ensemble forecasts with matching actuals.

    Realized prices deviate from the ensemble mean by noise whose sd is
    proportional to the ensemble half-range, shared across hours with
    correlation ``rho``.
    """

    def factory(
        n_days: int = 60,
        n_members: int = 5,
        seed: int = 0,
        rho: float = 0.6,
        start: date = START,
    ) -> tuple[list[EnsembleForecast], np.ndarray]:
        gen = np.random.default_rng(seed)
        hours = np.arange(HOURS)
        profile = 40.0 + 10.0 * np.sin(2 * np.pi * (hours - 6) / HOURS)
        forecasts, actuals = [], []
        for k in range(n_days):
            level = profile + gen.normal(0.0, 5.0)
            width = gen.uniform(1.0, 8.0)
            members = level[:, None] + width * gen.uniform(-1.0, 1.0, (HOURS, n_members))
            forecast = EnsembleForecast(
                day=start + timedelta(days=k),
                values=members,
                model_names=tuple(f"m{m}" for m in range(n_members)),
            )
            shared = gen.standard_normal()
            noise = np.sqrt(rho) * shared + np.sqrt(1 - rho) * gen.standard_normal(HOURS)
            forecasts.append(forecast)
            actuals.append(forecast.average + 0.8 * forecast.half_range * noise)
        return forecasts, np.array(actuals)

    return factory


def build_tiny_config(out_dir: Path) -> Config:
    """Config for a backtest that finishes in seconds.

    59 ensemble-only days, 41 probabilistic-training days, 10 test days.
    """
    return Config(
        data=DataConfig(synthetic=SyntheticConfig(start=START, n_days=110, seed=3)),
        split=SplitConfig(
            ensemble_train_start=START,
            prob_train_start=date(2015, 3, 1),
            test_start=date(2015, 4, 11),
            test_end=date(2015, 4, 20),
        ),
        ensemble=EnsembleConfig(window_days=45, refit_every_days=5),
        igep=TrainConfig(epochs=5, scenarios_per_example=10),
        backtest=BacktestConfig(
            methods=["igep", "raw", "mge", "ngr_crps_copula"],
            scenarios_per_day=50,
            repeats=2,
            base_seed=7,
            output=OutputConfig(dir=str(out_dir)),
        ),
        logging=LoggingConfig(level="WARNING"),
    )


@pytest.fixture(scope="session")
def make_tiny_config() -> Callable[[Path], Config]:
    return build_tiny_config


@pytest.fixture
def tiny_config(tmp_path: Path) -> Config:
    return build_tiny_config(tmp_path / "out")
