"""Uniform fit/sample interface over all scenario-generation methods.

Every method is fit on (ensemble forecast, realized prices) pairs of the
probabilistic training period and then produces scenarios and an analytic
predictive mean for individual test days. All inputs and outputs are prices;
methods that work in standardized units standardize internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

import numpy as np

from .baselines import (
    TAU_GRID,
    CopulaModel,
    MarginalForecast,
    MGEModel,
    NGRParams,
    QRAModel,
    copula_sample,
    fit_gaussian_copula,
    fit_mge,
    fit_ngr_model,
    fit_qra_model,
    igep_independent,
    raw_ensemble_scenarios,
    sample_mge,
)
from .core import EnsembleForecast, ScenarioSet, Standardizer, fit_standardizer
from .igep import IGEPModel, TrainConfig

METHOD_NAMES = (
    "igep",
    "raw",
    "mge",
    "igep_ind",
    "qra_copula",
    "ngr_ml_copula",
    "ngr_crps_copula",
)

# methods whose fit and sample draw no random numbers
DETERMINISTIC_METHODS = frozenset({"raw"})


class ScenarioMethod(Protocol):
    name: str

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None: ...

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet: ...

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray: ...

    def to_dict(self) -> dict[str, Any]: ...


def _require(value: Any, name: str) -> Any:
    if value is None:
        raise ValueError(f"{name} is not fitted")
    return value


@dataclass
class RawEnsembleMethod:
    """Ensemble members as scenarios; the scenario count is always M."""

    name: str = "raw"

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        return None

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        return raw_ensemble_scenarios(forecast)

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        return forecast.average

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "raw"}


@dataclass
class MGEMethod:
    name: str = "mge"
    model: MGEModel | None = None

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        means = np.array([f.average for f in forecasts])
        self.model = fit_mge(np.asarray(actuals, dtype=float) - means)

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        model = _require(self.model, self.name)
        return sample_mge(model, forecast.average, n_scenarios, rng, forecast.day)

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        return forecast.average

    def to_dict(self) -> dict[str, Any]:
        return _require(self.model, self.name).to_dict()


@dataclass
class IGEPMethod:
    """IGEP, adaptive or (``independent``) with the constant half-range 2."""

    config: TrainConfig = field(default_factory=TrainConfig)
    independent: bool = False
    name: str = "igep"
    model: IGEPModel | None = None

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        model = igep_independent(self.config) if self.independent else IGEPModel(config=self.config)
        self.model = model.fit(forecasts, actuals, rng=rng)

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        return _require(self.model, self.name).sample(forecast, n_scenarios, rng)

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        return _require(self.model, self.name).predictive_mean(forecast)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.name, **_require(self.model, self.name).to_dict()}


@dataclass
class QRACopulaMethod:
    """Per-hour QRA marginals joined by a Gaussian copula fit on training PITs."""

    taus: np.ndarray = field(default_factory=lambda: TAU_GRID)
    name: str = "qra_copula"
    qra: QRAModel | None = None
    copula: CopulaModel | None = None

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        actuals = np.asarray(actuals, dtype=float)
        self.qra = fit_qra_model(forecasts, actuals, self.taus)
        marginals = [self.qra.marginals(f) for f in forecasts]
        self.copula = fit_gaussian_copula(actuals, marginals)

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        qra = _require(self.qra, self.name)
        return copula_sample(qra.marginals(forecast), self.copula, n_scenarios, rng, forecast.day)

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        qra = _require(self.qra, self.name)
        return np.array([m.mean() for m in qra.marginals(forecast)])

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.name,
            "qra": _require(self.qra, self.name).to_dict(),
            "copula": _require(self.copula, self.name).to_dict(),
        }


@dataclass
class NGRCopulaMethod:
    """Gaussian NGR marginals (fit in standardized units) with a Gaussian copula."""

    estimation: str = "crps"
    name: str = "ngr_crps_copula"
    params: NGRParams | None = None
    standardizer: Standardizer | None = None
    copula: CopulaModel | None = None

    def _mu_sigma(self, forecast: EnsembleForecast) -> tuple[np.ndarray, np.ndarray]:
        params = _require(self.params, self.name)
        standardizer: Standardizer = self.standardizer
        standardized = forecast.standardized(standardizer)
        mu, sigma = params.mu_sigma(standardized.average, standardized.spread)
        return np.asarray(standardizer.invert(mu)), sigma * standardizer.std

    def marginals(self, forecast: EnsembleForecast) -> list[MarginalForecast]:
        mu, sigma = self._mu_sigma(forecast)
        return [MarginalForecast.gaussian(m, s) for m, s in zip(mu, sigma)]

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        rng: np.random.Generator,
    ) -> None:
        actuals = np.asarray(actuals, dtype=float)
        self.standardizer = fit_standardizer(actuals)
        standardized = [f.standardized(self.standardizer) for f in forecasts]
        xbar = np.array([f.average for f in standardized])
        spread = np.array([f.spread for f in standardized])
        self.params = fit_ngr_model(
            xbar, spread, self.standardizer.apply(actuals), method=self.estimation
        )
        self.copula = fit_gaussian_copula(actuals, [self.marginals(f) for f in forecasts])

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        copula = _require(self.copula, self.name)
        return copula_sample(self.marginals(forecast), copula, n_scenarios, rng, forecast.day)

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        return self._mu_sigma(forecast)[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.name,
            "ngr": _require(self.params, self.name).to_dict(),
            "standardizer": _require(self.standardizer, self.name).to_dict(),
            "copula": _require(self.copula, self.name).to_dict(),
        }


def build_method(
    name: str,
    train_config: TrainConfig | None = None,
    taus: Sequence[float] = TAU_GRID,
) -> ScenarioMethod:
    """Fresh, unfitted method by name.

    Raises:
        ValueError: unknown method name
    """
    train_config = train_config or TrainConfig()
    if name == "igep":
        return IGEPMethod(config=train_config)
    if name == "igep_ind":
        return IGEPMethod(config=train_config, independent=True, name="igep_ind")
    if name == "raw":
        return RawEnsembleMethod()
    if name == "mge":
        return MGEMethod()
    if name == "qra_copula":
        return QRACopulaMethod(taus=np.asarray(taus, dtype=float))
    if name == "ngr_ml_copula":
        return NGRCopulaMethod(estimation="ml", name=name)
    if name == "ngr_crps_copula":
        return NGRCopulaMethod(estimation="crps", name=name)
    raise ValueError(f"Unknown method: {name}. Must be one of {list(METHOD_NAMES)}")
