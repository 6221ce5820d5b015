"""Proper scoring rules and point-error metrics.

The same energy-score estimator is used as IGEP training loss and as the
evaluation metric, so the loss optimized and the number reported agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import erf

PairEstimator = Literal["unbiased", "biased"]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_INV_SQRTPI = 1.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class ScoringConfig:
    """Energy-score settings.

    ``es_beta`` must lie in (0, 2), where the energy score is strictly proper.
    ``pair_estimator`` selects the 1/(2S(S-1)) ("unbiased") or 1/(2S²)
    ("biased") normalization of the scenario-diversity term.
    """

    es_beta: float = 1.0
    pair_estimator: PairEstimator = "unbiased"

    def __post_init__(self) -> None:
        if not 0.0 < self.es_beta < 2.0:
            raise ValueError(f"es_beta must be in (0, 2), got {self.es_beta}")
        if self.pair_estimator not in ("unbiased", "biased"):
            raise ValueError(
                f"Invalid pair_estimator: {self.pair_estimator}. Must be 'unbiased' or 'biased'"
            )


DEFAULT_SCORING = ScoringConfig()


def normal_cdf(z: np.ndarray | float) -> np.ndarray | float:
    """Standard normal CDF via erf."""
    return 0.5 * (1.0 + erf(np.asarray(z, dtype=float) / _SQRT2))


def normal_pdf(z: np.ndarray | float) -> np.ndarray | float:
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / _SQRT2PI


def _pair_sum(scenarios: np.ndarray, beta: float) -> float:
    """Sum over unordered pairs s < s' of ||x_s - x_s'||^beta."""
    n_scenarios, dimension = scenarios.shape
    if n_scenarios < 2:
        return 0.0
    if dimension == 1 and beta == 1.0:
        ordered = np.sort(scenarios[:, 0])
        ranks = np.arange(1, n_scenarios + 1, dtype=float)
        return float(np.dot(ordered, 2.0 * ranks - n_scenarios - 1.0))
    distances = pdist(scenarios)
    if beta != 1.0:
        distances = distances**beta
    return float(distances.sum())


def energy_score(
    scenarios: np.ndarray,
    y: np.ndarray,
    cfg: ScoringConfig = DEFAULT_SCORING,
) -> float:
    """Sample energy score of an S×D scenario matrix against observation ``y``.

    ES = (1/S) Σ_s ||x_s - y||^β - c Σ_{s≠s'} ||x_s - x_s'||^β with
    c = 1/(2S(S-1)) for the unbiased and 1/(2S²) for the biased estimator.

    Raises:
        ValueError: shape mismatch, non-finite input, or S < 2 with the
            unbiased estimator
    """
    scenarios = np.asarray(scenarios, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if scenarios.ndim != 2 or scenarios.shape[1] != y.size:
        raise ValueError(
            f"scenarios must be S×{y.size} for a {y.size}-dimensional observation, "
            f"got {scenarios.shape}"
        )
    if not (np.all(np.isfinite(scenarios)) and np.all(np.isfinite(y))):
        raise ValueError("energy_score inputs must be finite")
    n_scenarios = scenarios.shape[0]
    if n_scenarios < 1:
        raise ValueError("energy_score needs at least one scenario")
    if cfg.pair_estimator == "unbiased" and n_scenarios < 2:
        raise ValueError("the unbiased energy-score estimator needs S >= 2 scenarios")

    beta = cfg.es_beta
    errors = np.linalg.norm(scenarios - y, axis=1)
    data_term = float(np.mean(errors if beta == 1.0 else errors**beta))

    # Σ_{s≠s'} counts every unordered pair twice
    pairs = 2.0 * _pair_sum(scenarios, beta)
    if cfg.pair_estimator == "unbiased":
        diversity = pairs / (2.0 * n_scenarios * (n_scenarios - 1))
    else:
        diversity = pairs / (2.0 * n_scenarios * n_scenarios)
    return data_term - diversity


def crps_sample(
    samples: np.ndarray,
    y: float,
    cfg: ScoringConfig = DEFAULT_SCORING,
) -> float:
    """Sample CRPS; identical to ``energy_score`` with D=1 and β=1."""
    samples = np.asarray(samples, dtype=float).reshape(-1, 1)
    return energy_score(samples, np.array([y], dtype=float), replace(cfg, es_beta=1.0))


def mean_marginal_crps(
    scenarios: np.ndarray,
    y: np.ndarray,
    cfg: ScoringConfig = DEFAULT_SCORING,
) -> float:
    """CRPS of each hourly marginal of a scenario matrix, averaged over hours."""
    scenarios = np.asarray(scenarios, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    return float(
        np.mean([crps_sample(scenarios[:, d], y[d], cfg) for d in range(y.size)])
    )


def crps_gaussian(
    mu: np.ndarray | float,
    sigma: np.ndarray | float,
    y: np.ndarray | float,
) -> np.ndarray | float:
    """Closed-form CRPS of N(mu, sigma²) at y (vectorized).

    Raises:
        ValueError: any sigma <= 0
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("crps_gaussian requires sigma > 0")
    z = (np.asarray(y, dtype=float) - mu) / sigma
    value = sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - _INV_SQRTPI)
    return float(value) if value.ndim == 0 else value


def pinball_loss(
    q_pred: np.ndarray | float,
    y: np.ndarray | float,
    tau: float,
) -> np.ndarray | float:
    """Pinball (quantile) loss τ(y-q) for y ≥ q, (1-τ)(q-y) otherwise.

    Raises:
        ValueError: tau outside (0, 1)
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    diff = np.asarray(y, dtype=float) - np.asarray(q_pred, dtype=float)
    loss = np.where(diff >= 0, tau * diff, (tau - 1.0) * diff)
    return float(loss) if loss.ndim == 0 else loss


def _paired(pred: np.ndarray, actual: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float).ravel()
    actual = np.asarray(actual, dtype=float).ravel()
    if pred.size != actual.size:
        raise ValueError(f"length mismatch: {pred.size} predictions, {actual.size} actuals")
    if pred.size == 0:
        raise ValueError("need at least one prediction")
    return pred, actual


def mae(pred: np.ndarray, actual: np.ndarray) -> float:
    """Mean absolute error."""
    pred, actual = _paired(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def rmse(pred: np.ndarray, actual: np.ndarray) -> float:
    """Root mean squared error."""
    pred, actual = _paired(pred, actual)
    return float(np.sqrt(np.mean((pred - actual) ** 2)))
