"""Tests for the synthetic market generator."""

from __future__ import annotations

from dataclasses import replace
from datetime import date, timedelta

import numpy as np
import pytest
from scipy.stats import spearmanr

from igep_scenarios.core import HOURS
from igep_scenarios.synthetic import SyntheticConfig, generate_synthetic, merit_order_price

SMALL = SyntheticConfig(start=date(2016, 2, 27), n_days=20, seed=1)


class TestGenerateSynthetic:
    """Tests for generate_synthetic."""

    def test_shape_and_calendar(self) -> None:
        dataset = generate_synthetic(SMALL)
        assert dataset.n_days == 20
        assert dataset.price.shape == (20, HOURS)
        assert dataset.days[0] == date(2016, 2, 27)
        # leap day included
        assert dataset.days[2] == date(2016, 2, 29)
        assert dataset.days[-1] == date(2016, 2, 27) + timedelta(days=19)

    def test_deterministic(self) -> None:
        first = generate_synthetic(SMALL)
        second = generate_synthetic(SMALL)
        for name in ("price", "load", "wind", "pv"):
            np.testing.assert_array_equal(getattr(first, name), getattr(second, name))

    def test_seed_argument_overrides_config(self) -> None:
        overridden = generate_synthetic(SMALL, seed=9)
        configured = generate_synthetic(replace(SMALL, seed=9))
        np.testing.assert_array_equal(overridden.price, configured.price)
        assert not np.array_equal(overridden.price, generate_synthetic(SMALL).price)

    def test_noiseless_price_is_function_of_forecasts(self) -> None:
        """With noise_scale 0 the price follows the merit order of the RL forecast."""
        cfg = replace(SMALL, noise_scale=0.0)
        dataset = generate_synthetic(cfg)
        weekend = np.array([d.weekday() >= 5 for d in dataset.days])
        expected = (
            cfg.price_base
            + merit_order_price(dataset.residual_load / 1000.0, cfg)
            - cfg.weekend_discount * weekend[:, None]
        )
        np.testing.assert_allclose(dataset.price, expected, rtol=1e-12, atol=1e-9)

    def test_pv_zero_at_night(self) -> None:
        dataset = generate_synthetic(SMALL)
        assert np.all(dataset.pv[:, 0] == 0.0)
        assert np.all(dataset.pv[:, 23] == 0.0)
        assert np.all(dataset.pv[:, 12] > 0.0)

    def test_wind_within_capacity(self) -> None:
        dataset = generate_synthetic(SMALL)
        assert np.all(dataset.wind > 0)
        assert np.all(dataset.wind < SMALL.wind_capacity)

    def test_forecast_error_grows_with_wind(self) -> None:
        """Residual-load errors, read back through the merit order, scale with wind."""
        quiet = SyntheticConfig(n_days=400, seed=2, fuel_volatility=0.0, price_noise=0.0)
        noiseless = generate_synthetic(replace(quiet, noise_scale=0.0))
        noisy = generate_synthetic(quiet)
        np.testing.assert_array_equal(noisy.residual_load, noiseless.residual_load)

        rl_gw = noiseless.residual_load / 1000.0
        slope = quiet.merit_slope * np.cosh((rl_gw - quiet.merit_mid_gw) / quiet.merit_scale_gw)
        error_gw = np.abs(noisy.price - noiseless.price) / slope
        rank_correlation = spearmanr(noisy.wind.mean(axis=1), error_gw.mean(axis=1)).statistic
        assert rank_correlation > 0.3


class TestSyntheticConfig:
    """Tests for SyntheticConfig validation."""

    def test_defaults_cover_three_years(self) -> None:
        cfg = SyntheticConfig()
        assert cfg.n_days == 1096
        assert cfg.start == date(2015, 1, 1)

    @pytest.mark.parametrize(
        "field,value",
        [
            ("n_days", 0),
            ("noise_scale", -1.0),
            ("wind_persistence", 1.0),
            ("rl_error_day_correlation", 1.5),
            ("merit_scale_gw", 0.0),
        ],
    )
    def test_invalid_values(self, field: str, value: float) -> None:
        with pytest.raises(ValueError, match=field):
            SyntheticConfig(**{field: value})

    def test_to_dict(self) -> None:
        data = SMALL.to_dict()
        assert data["start"] == "2016-02-27"
        assert data["n_days"] == 20
