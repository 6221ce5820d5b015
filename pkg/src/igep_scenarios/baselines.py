"""Benchmark scenario generators.

- raw ensemble: members are the scenarios
- MGE: ensemble mean plus multivariate Gaussian residuals
- IGEP with independent latents: constant delta = 2
- QRA + Gaussian copula: linear quantile regression on members per hour
- NGR + Gaussian copula: Gaussian marginals with mean/spread linear in the
  ensemble mean/standard deviation, fit by maximum likelihood or minimum CRPS
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Any, Literal, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import minimize
from scipy.special import ndtri
from scipy.stats import rankdata

from .core import EnsembleForecast, ScenarioSet
from .igep import IGEPModel, TrainConfig
from .logging_config import get_logger
from .scoring import crps_gaussian, normal_cdf, normal_pdf

logger = get_logger("baselines")

TAU_GRID = np.round(np.arange(1, 100) / 100.0, 2)
INDEPENDENT_DELTA = 2.0
EIGEN_FLOOR = 1e-8
CHOLESKY_JITTER = 1e-10
SIGMA_MIN = 1e-3
TAIL_CAP_FACTOR = 5.0
# bases worse conditioned than this give round-off, not vertices
MAX_BASIS_CONDITION = 1e10

_INV_SQRTPI = 1.0 / math.sqrt(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _frozen(values: object) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.flags.writeable = False
    return array


# ---------------------------------------------------------------------------
# Raw ensemble
# ---------------------------------------------------------------------------


def raw_ensemble_scenarios(forecast: EnsembleForecast) -> ScenarioSet:
    """The M members as M scenarios (scenario m = column m)."""
    return ScenarioSet(day=forecast.day, scenarios=forecast.values.T)


# ---------------------------------------------------------------------------
# Positive-definite repair
# ---------------------------------------------------------------------------


def clip_eigenvalues(matrix: np.ndarray, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Symmetrize and raise eigenvalues below ``floor`` to ``floor``."""
    sym = (np.asarray(matrix, dtype=float) + np.asarray(matrix, dtype=float).T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals.min() >= floor:
        return sym
    clipped = (eigvecs * np.maximum(eigvals, floor)) @ eigvecs.T
    return (clipped + clipped.T) / 2.0


def repair_correlation(matrix: np.ndarray, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Nearest-ish valid correlation matrix: eigenvalue clipping, unit diagonal.

    A symmetric, unit-diagonal matrix whose eigenvalues are all at least
    ``floor`` is returned unchanged. Repairs target twice the floor, so
    repairing twice gives the same matrix.
    """
    sym = (np.asarray(matrix, dtype=float) + np.asarray(matrix, dtype=float).T) / 2.0
    if np.allclose(np.diag(sym), 1.0, rtol=0, atol=1e-12) and np.linalg.eigvalsh(sym).min() >= floor:
        return sym
    target = 2.0 * floor
    clipped = clip_eigenvalues(sym, target)
    scale = 1.0 / np.sqrt(np.diag(clipped))
    repaired = clipped * np.outer(scale, scale)
    repaired = (repaired + repaired.T) / 2.0
    np.fill_diagonal(repaired, 1.0)
    # rescaling can pull the smallest eigenvalue back under the target
    smallest = np.linalg.eigvalsh(repaired).min()
    if smallest < target:
        weight = (target - smallest) / (1.0 - smallest)
        repaired = (1.0 - weight) * repaired + weight * np.eye(repaired.shape[0])
        np.fill_diagonal(repaired, 1.0)
    return repaired


def _cholesky(matrix: np.ndarray) -> np.ndarray:
    jittered = matrix + CHOLESKY_JITTER * np.eye(matrix.shape[0])
    return np.linalg.cholesky(jittered)


# ---------------------------------------------------------------------------
# Multivariate Gaussian errors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MGEModel:
    """Residual covariance of the ensemble mean and its Cholesky factor."""

    covariance: np.ndarray
    cholesky: np.ndarray

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "mge", "covariance": self.covariance.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MGEModel:
        covariance = clip_eigenvalues(np.asarray(data["covariance"], dtype=float))
        return cls(covariance=_frozen(covariance), cholesky=_frozen(_cholesky(covariance)))


def fit_mge(residuals: np.ndarray) -> MGEModel:
    """Estimate Σ_ε from N×D training residuals y_n - xbar_n.

    Raises:
        ValueError: non-finite residuals or fewer than two residual vectors
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2 or residuals.shape[0] < 2:
        raise ValueError(f"need an N×D residual matrix with N >= 2, got {residuals.shape}")
    if not np.all(np.isfinite(residuals)):
        raise ValueError("MGE residuals must be finite")
    n, dim = residuals.shape
    if n < dim + 1:
        logger.warning(f"MGE fit on {n} residual vectors for D={dim}: covariance is rank deficient")
    covariance = clip_eigenvalues(np.cov(residuals, rowvar=False, ddof=1).reshape(dim, dim))
    return MGEModel(covariance=_frozen(covariance), cholesky=_frozen(_cholesky(covariance)))


def sample_mge(
    model: MGEModel,
    xbar: np.ndarray,
    n_scenarios: int,
    rng: np.random.Generator,
    day: date,
) -> ScenarioSet:
    """xbar + L·n with n standard normal."""
    normals = rng.standard_normal((n_scenarios, model.cholesky.shape[0]))
    return ScenarioSet(day=day, scenarios=np.asarray(xbar, dtype=float) + normals @ model.cholesky.T)


# ---------------------------------------------------------------------------
# IGEP with independent latents
# ---------------------------------------------------------------------------


def igep_independent(config: TrainConfig) -> IGEPModel:
    """IGEP whose adaptive half-ranges are the constant 2 for every example."""
    return IGEPModel(config=replace(config, fixed_delta=INDEPENDENT_DELTA))


# ---------------------------------------------------------------------------
# Marginal forecasts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalForecast:
    """Univariate predictive distribution: a quantile grid or a Gaussian.

    Quantile grids are interpolated linearly between grid points and
    extrapolated linearly beyond the outer grid points with the slope of the
    adjacent segment; the extension is capped at ``TAIL_CAP_FACTOR`` times the
    interquartile range.
    """

    kind: Literal["quantile_grid", "gaussian"]
    taus: np.ndarray | None = None
    values: np.ndarray | None = None
    mu: float | None = None
    sigma: float | None = None
    _p_knots: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _v_knots: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "gaussian":
            if self.mu is None or self.sigma is None or not np.isfinite(self.mu):
                raise ValueError("gaussian marginal needs finite mu and sigma")
            if not (self.sigma > 0 and np.isfinite(self.sigma)):
                raise ValueError(f"gaussian marginal needs sigma > 0, got {self.sigma}")
            return
        if self.kind != "quantile_grid":
            raise ValueError(f"Invalid marginal kind: {self.kind}")
        taus = _frozen(self.taus)
        values = _frozen(self.values)
        if taus.ndim != 1 or taus.shape != values.shape or taus.size < 2:
            raise ValueError("quantile grid needs matching taus/values of length >= 2")
        if np.any(np.diff(values) < 0):
            raise ValueError("quantile values must be non-decreasing in tau")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)
        p_knots, v_knots = self._tail_knots(taus, values)
        object.__setattr__(self, "_p_knots", p_knots)
        object.__setattr__(self, "_v_knots", v_knots)

    @staticmethod
    def _tail_knots(taus: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        iqr = float(np.interp(0.75, taus, values) - np.interp(0.25, taus, values))
        cap = TAIL_CAP_FACTOR * max(iqr, 0.0)
        p_lo, p_hi = [0.0], [1.0]
        v_lo, v_hi = [], []

        slope_lo = (values[1] - values[0]) / (taus[1] - taus[0])
        reach_lo = slope_lo * taus[0]
        if reach_lo > cap:
            p_lo.append(taus[0] - cap / slope_lo)
            v_lo = [values[0] - cap, values[0] - cap]
        else:
            v_lo = [values[0] - reach_lo]

        slope_hi = (values[-1] - values[-2]) / (taus[-1] - taus[-2])
        reach_hi = slope_hi * (1.0 - taus[-1])
        if reach_hi > cap:
            p_hi.insert(0, taus[-1] + cap / slope_hi)
            v_hi = [values[-1] + cap, values[-1] + cap]
        else:
            v_hi = [values[-1] + reach_hi]

        p_knots = np.concatenate([p_lo, taus, p_hi])
        v_knots = np.concatenate([v_lo, values, v_hi])
        return _frozen(p_knots), _frozen(v_knots)

    @classmethod
    def gaussian(cls, mu: float, sigma: float) -> MarginalForecast:
        return cls(kind="gaussian", mu=float(mu), sigma=float(sigma))

    def inverse_cdf(self, p: np.ndarray | float) -> np.ndarray:
        """Quantile function on (0, 1)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "gaussian":
            return self.mu + self.sigma * ndtri(p)
        return np.interp(p, self._p_knots, self._v_knots)

    def cdf(self, y: np.ndarray | float) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "gaussian":
            return normal_cdf((y - self.mu) / self.sigma)
        return np.interp(y, self._v_knots, self._p_knots, left=0.0, right=1.0)

    def mean(self) -> float:
        """Distribution mean (grid average for quantile grids)."""
        if self.kind == "gaussian":
            return float(self.mu)
        return float(np.mean(self.values))

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "mu": self.mu, "sigma": self.sigma}
        return {"kind": "quantile_grid", "taus": self.taus.tolist(), "values": self.values.tolist()}


def quantiles_to_marginal(taus: Sequence[float], values: Sequence[float]) -> MarginalForecast:
    """Quantile-grid marginal with crossing repaired by sorting.

    Raises:
        ValueError: non-finite values, or taus not strictly increasing in (0, 1)
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(taus))):
        raise ValueError("quantile values must be finite")
    if np.any(np.diff(taus) <= 0) or taus[0] <= 0 or taus[-1] >= 1:
        raise ValueError("taus must be strictly increasing inside (0, 1)")
    return MarginalForecast(kind="quantile_grid", taus=taus, values=np.sort(values))


# ---------------------------------------------------------------------------
# Quantile regression averaging
# ---------------------------------------------------------------------------


def _check_loss(residuals: np.ndarray, tau: float) -> float:
    return float(np.sum(np.where(residuals >= 0, tau * residuals, (tau - 1.0) * residuals)))


def _vertex_polish(
    design: np.ndarray, y: np.ndarray, tau: float, coef: np.ndarray, rounds: int = 5
) -> np.ndarray:
    """Move to the best basic solution near ``coef``.

    Linear quantile regression attains its optimum where p residuals vanish.
    Candidate bases are drawn from the p+3 observations with the smallest
    absolute residuals.
    """
    n, p = design.shape
    best, best_loss = coef, _check_loss(y - design @ coef, tau)
    for _ in range(rounds):
        residuals = np.abs(y - design @ best)
        pool = np.argsort(residuals, kind="stable")[: min(n, p + 3)]
        improved = False
        for basis in itertools.combinations(pool, p):
            sub = design[list(basis)]
            if np.linalg.cond(sub) > MAX_BASIS_CONDITION:
                continue
            try:
                candidate = np.linalg.solve(sub, y[list(basis)])
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(candidate)):
                continue
            loss = _check_loss(y - design @ candidate, tau)
            if loss < best_loss - 1e-15 * max(1.0, abs(best_loss)):
                best, best_loss, improved = candidate, loss, True
        if not improved:
            break
    return best


def fit_quantile_regression(
    design: np.ndarray,
    y: np.ndarray,
    tau: float,
    eps_final: float = 1e-6,
    max_iter: int = 100,
) -> np.ndarray:
    """Linear quantile regression by iteratively reweighted least squares.

    Residual weights tau/|r| (or (1-tau)/|r|) use a smoothing floor that is
    decreased geometrically to ``eps_final``; the result is then polished to
    the nearest better basic solution.

    Args:
        design: N×p design matrix (include an intercept column if wanted)
        y: N targets
        tau: Quantile level in (0, 1)
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = design.shape
    gram_jitter = 0.0
    if np.linalg.matrix_rank(design) < p:
        gram_jitter = 1e-8
        logger.warning(f"QRA design is rank deficient (rank < {p}); using ridge jitter")

    def solve(weights: np.ndarray) -> np.ndarray:
        weighted = design * weights[:, None]
        gram = design.T @ weighted
        if gram_jitter:
            gram = gram + gram_jitter * max(np.trace(gram) / p, 1.0) * np.eye(p)
        return scipy.linalg.solve(gram, weighted.T @ y, assume_a="sym")

    coef = solve(np.ones(n))
    scale = max(float(np.std(y)), 1e-12)
    eps = max(1e-2 * scale, eps_final)
    while True:
        for _ in range(max_iter):
            residuals = y - design @ coef
            weights = np.where(residuals >= 0, tau, 1.0 - tau) / np.maximum(np.abs(residuals), eps)
            updated = solve(weights)
            converged = np.max(np.abs(updated - coef)) <= 1e-10 * (1.0 + np.max(np.abs(coef)))
            coef = updated
            if converged:
                break
        if eps <= eps_final:
            break
        eps = max(eps * 0.1, eps_final)
    if gram_jitter:
        return coef
    return _vertex_polish(design, y, tau, coef)


def fit_qra(
    members: np.ndarray,
    y: np.ndarray,
    taus: Sequence[float] = TAU_GRID,
) -> np.ndarray:
    """QRA coefficients for one hour.

    Args:
        members: N×M ensemble member forecasts
        y: N realized prices
        taus: Quantile levels

    Returns:
        len(taus)×(M+1) coefficients [beta_0, beta_1..beta_M] per tau

    Raises:
        ValueError: fewer than M+2 training examples
    """
    members = np.asarray(members, dtype=float)
    n, m = members.shape
    if n < m + 2:
        raise ValueError(f"QRA needs at least {m + 2} examples for M={m}, got {n}")
    design = np.column_stack([np.ones(n), members])
    return np.array([fit_quantile_regression(design, y, float(tau)) for tau in taus])


@dataclass(frozen=True)
class QRAModel:
    """Per-hour QRA coefficients, shape D × n_tau × (M+1)."""

    coefficients: np.ndarray
    taus: np.ndarray

    def marginals(self, forecast: EnsembleForecast) -> list[MarginalForecast]:
        design = np.column_stack([np.ones(forecast.values.shape[0]), forecast.values])
        return [
            quantiles_to_marginal(self.taus, self.coefficients[h] @ design[h])
            for h in range(design.shape[0])
        ]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "qra", "taus": self.taus.tolist(), "coefficients": self.coefficients.tolist()}


def fit_qra_model(
    forecasts: Sequence[EnsembleForecast],
    actuals: np.ndarray,
    taus: Sequence[float] = TAU_GRID,
) -> QRAModel:
    """Fit QRA separately for every hour of the day."""
    stacked = np.array([f.values for f in forecasts])  # N × D × M
    actuals = np.asarray(actuals, dtype=float)
    coefficients = np.array(
        [fit_qra(stacked[:, h, :], actuals[:, h], taus) for h in range(stacked.shape[1])]
    )
    return QRAModel(coefficients=_frozen(coefficients), taus=_frozen(taus))


# ---------------------------------------------------------------------------
# Nonhomogeneous Gaussian regression
# ---------------------------------------------------------------------------

NGRMethod = Literal["ml", "crps"]


def _ngr_objective(
    params: np.ndarray,
    xbar: np.ndarray,
    spread: np.ndarray,
    y: np.ndarray,
    method: NGRMethod,
    sigma_min: float,
) -> tuple[float, np.ndarray]:
    b0, b1, g0, g1 = params
    mu = b0 + b1 * xbar
    raw_sigma = g0 + g1 * spread
    sigma = np.maximum(raw_sigma, sigma_min)
    z = (y - mu) / sigma
    if method == "ml":
        value = np.mean(np.log(sigma) + 0.5 * z * z) + _HALF_LOG_2PI
        d_mu = -z / sigma
        d_sigma = (1.0 - z * z) / sigma
    else:
        value = np.mean(crps_gaussian(mu, sigma, y))
        d_mu = -(2.0 * normal_cdf(z) - 1.0)
        d_sigma = 2.0 * normal_pdf(z) - _INV_SQRTPI
    d_sigma = np.where(raw_sigma > sigma_min, d_sigma, 0.0)
    grad = np.array(
        [np.mean(d_mu), np.mean(d_mu * xbar), np.mean(d_sigma), np.mean(d_sigma * spread)]
    )
    return float(value), grad


def ngr_objective(
    params: np.ndarray,
    xbar: np.ndarray,
    spread: np.ndarray,
    y: np.ndarray,
    method: NGRMethod,
    sigma_min: float = SIGMA_MIN,
) -> float:
    """Mean negative log-likelihood ("ml") or mean CRPS ("crps") of NGR parameters."""
    value, _ = _ngr_objective(np.asarray(params, dtype=float), xbar, spread, y, method, sigma_min)
    return value


def fit_ngr(
    xbar: np.ndarray,
    spread: np.ndarray,
    y: np.ndarray,
    method: NGRMethod = "crps",
    sigma_min: float = SIGMA_MIN,
    max_iter: int = 2000,
) -> np.ndarray:
    """NGR coefficients (beta_0, beta_1, gamma_0, gamma_1) for one hour.

    Minimizes the chosen criterion with BFGS from several starting points and
    keeps the best result. On non-convergence the best point found is
    returned with a warning.

    Raises:
        ValueError: unknown method or fewer than 10 examples
    """
    if method not in ("ml", "crps"):
        raise ValueError(f"Invalid NGR method: {method}. Must be 'ml' or 'crps'")
    xbar = np.asarray(xbar, dtype=float)
    spread = np.asarray(spread, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size < 10:
        raise ValueError(f"NGR needs at least 10 examples, got {y.size}")

    slope, intercept = np.polyfit(xbar, y, 1) if np.ptp(xbar) > 0 else (0.0, float(np.mean(y)))
    resid_sd = max(float(np.std(y - intercept - slope * xbar)), 10 * sigma_min)
    mean_spread = max(float(np.mean(spread)), 1e-12)
    starts = [
        np.array([intercept, slope, resid_sd, 0.0]),
        np.array([intercept, slope, 0.5 * resid_sd, 0.5 * resid_sd / mean_spread]),
        np.array([intercept, slope, 0.1 * resid_sd, 0.9 * resid_sd / mean_spread]),
    ]

    best = None
    for start in starts:
        result = minimize(
            _ngr_objective,
            start,
            args=(xbar, spread, y, method, sigma_min),
            jac=True,
            method="BFGS",
            options={"gtol": 1e-10, "maxiter": max_iter},
        )
        if best is None or result.fun < best.fun:
            best = result
    assert best is not None
    if not best.success:
        logger.warning(f"NGR ({method}) did not converge: {best.message}; using best point found")
    return np.asarray(best.x, dtype=float)


@dataclass(frozen=True)
class NGRParams:
    """Per-hour NGR coefficients, shape D × 4: (beta_0, beta_1, gamma_0, gamma_1)."""

    coefficients: np.ndarray
    method: NGRMethod
    sigma_min: float = SIGMA_MIN

    def mu_sigma(self, xbar: np.ndarray, spread: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        b0, b1, g0, g1 = self.coefficients.T
        mu = b0 + b1 * xbar
        sigma = np.maximum(g0 + g1 * spread, self.sigma_min)
        return mu, sigma

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": f"ngr_{self.method}",
            "method": self.method,
            "sigma_min": self.sigma_min,
            "coefficients": self.coefficients.tolist(),
        }


def fit_ngr_model(
    xbar: np.ndarray,
    spread: np.ndarray,
    actuals: np.ndarray,
    method: NGRMethod = "crps",
    sigma_min: float = SIGMA_MIN,
) -> NGRParams:
    """Fit NGR for every hour from N×D ensemble means, spreads and actuals."""
    coefficients = np.array(
        [
            fit_ngr(xbar[:, h], spread[:, h], actuals[:, h], method, sigma_min)
            for h in range(actuals.shape[1])
        ]
    )
    return NGRParams(coefficients=_frozen(coefficients), method=method, sigma_min=sigma_min)


# ---------------------------------------------------------------------------
# Gaussian copula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CopulaModel:
    """Gaussian-copula correlation matrix and its Cholesky factor."""

    correlation: np.ndarray
    cholesky: np.ndarray

    @classmethod
    def from_correlation(cls, correlation: np.ndarray) -> CopulaModel:
        repaired = repair_correlation(correlation)
        return cls(correlation=_frozen(repaired), cholesky=_frozen(_cholesky(repaired)))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "gaussian_copula", "correlation": self.correlation.tolist()}


def normal_scores(observations: np.ndarray) -> np.ndarray:
    """Column-wise Φ⁻¹(rank/(N+1)) with average ranks for ties."""
    observations = np.asarray(observations, dtype=float)
    ranks = rankdata(observations, method="average", axis=0)
    return ndtri(ranks / (observations.shape[0] + 1.0))


def fit_gaussian_copula(
    residuals: np.ndarray,
    marginals: Sequence[Sequence[MarginalForecast]] | None = None,
    min_days: int = 30,
) -> CopulaModel:
    """Copula correlation from normal scores of rank-transformed N×D observations.

    Args:
        residuals: N×D training observations (residuals or realized values)
        marginals: Optional N lists of D predictive marginals; when given, the
            observations are first mapped through their marginal CDFs (PIT)
        min_days: Minimum number of training days

    Raises:
        ValueError: fewer than ``min_days`` observations
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2 or residuals.shape[0] < min_days:
        raise ValueError(
            f"Gaussian copula needs at least {min_days} training days, got shape {residuals.shape}"
        )
    if marginals is not None:
        if len(marginals) != residuals.shape[0]:
            raise ValueError(f"{len(marginals)} marginal sets for {residuals.shape[0]} days")
        residuals = np.array(
            [
                [float(m.cdf(value)) for m, value in zip(day_marginals, row, strict=True)]
                for day_marginals, row in zip(marginals, residuals)
            ]
        )
    scores = normal_scores(residuals)
    with np.errstate(invalid="ignore", divide="ignore"):
        correlation = np.corrcoef(scores, rowvar=False)
    # constant columns give NaN correlations; treat them as independent
    correlation = np.nan_to_num(np.atleast_2d(correlation), nan=0.0)
    np.fill_diagonal(correlation, 1.0)
    return CopulaModel.from_correlation(correlation)


def copula_sample(
    marginals: Sequence[MarginalForecast],
    copula: CopulaModel,
    n_scenarios: int,
    rng: np.random.Generator,
    day: date,
) -> ScenarioSet:
    """ŷ_d = F_d⁻¹(Φ(n_d)) with n ~ N(0, Σ̃)."""
    dim = copula.cholesky.shape[0]
    if len(marginals) != dim:
        raise ValueError(f"{len(marginals)} marginals for a {dim}-dimensional copula")
    normals = rng.standard_normal((n_scenarios, dim)) @ copula.cholesky.T
    # Φ(n) rounds to exactly 0 or 1 beyond ~8.3σ
    uniforms = np.clip(normal_cdf(normals), 1e-16, 1.0 - 1e-16)
    scenarios = np.column_stack(
        [marginal.inverse_cdf(uniforms[:, d]) for d, marginal in enumerate(marginals)]
    )
    return ScenarioSet(day=day, scenarios=scenarios)
