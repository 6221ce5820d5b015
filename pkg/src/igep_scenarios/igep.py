"""Implicit generative ensemble post-processing (IGEP).

A linear generator maps the ensemble mean and a latent sample to one joint
scenario::

    y_hat = alpha + beta * xbar + gamma @ u + omega @ v

where ``u_d ~ U(-delta_d, delta_d)`` with ``delta_d`` the half-range of the
ensemble members for dimension d, and ``v_j ~ U(-1, 1)``. Parameters are fit
by minimizing the sample energy score of generated scenarios with Adam. The
generator is linear, so the loss gradient is computed in closed form.

All quantities in this module are in standardized units except where
``predict_scenarios`` maps back to prices.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np

from .core import EnsembleForecast, ScenarioSet, Standardizer, fit_standardizer
from .errors import TrainingDivergedError
from .logging_config import get_logger

logger = get_logger("igep")


def _frozen(values: object) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class GeneratorParams:
    """Generator parameters theta = (alpha, beta, gamma, omega)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray

    def __post_init__(self) -> None:
        alpha = _frozen(self.alpha)
        beta = _frozen(self.beta)
        gamma = _frozen(self.gamma)
        omega = _frozen(self.omega)
        dim = alpha.shape[0] if alpha.ndim == 1 else -1
        if (
            dim < 1
            or beta.shape != (dim,)
            or gamma.shape != (dim, dim)
            or omega.ndim != 2
            or omega.shape[0] != dim
        ):
            raise ValueError(
                "inconsistent generator shapes: "
                f"alpha {alpha.shape}, beta {beta.shape}, gamma {gamma.shape}, omega {omega.shape}"
            )
        for name, array in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("omega", omega)):
            if not np.all(np.isfinite(array)):
                raise ValueError(f"non-finite entries in generator parameter {name}")
            object.__setattr__(self, name, array)

    @property
    def dimension(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_independent(self) -> int:
        return self.omega.shape[1]

    @property
    def n_params(self) -> int:
        """2D + D·D + D·J."""
        return self.alpha.size + self.beta.size + self.gamma.size + self.omega.size

    @classmethod
    def initial(cls, dimension: int, n_independent: int) -> GeneratorParams:
        """alpha=0, beta=1, gamma=I, omega=0: predicts the ensemble mean in expectation."""
        return cls(
            alpha=np.zeros(dimension),
            beta=np.ones(dimension),
            gamma=np.eye(dimension),
            omega=np.zeros((dimension, n_independent)),
        )

    def flatten(self) -> np.ndarray:
        return np.concatenate(
            [self.alpha, self.beta, self.gamma.ravel(), self.omega.ravel()]
        )

    @classmethod
    def unflatten(cls, vector: np.ndarray, dimension: int, n_independent: int) -> GeneratorParams:
        d, j = dimension, n_independent
        expected = 2 * d + d * d + d * j
        if vector.size != expected:
            raise ValueError(f"expected {expected} parameters, got {vector.size}")
        return cls(
            alpha=vector[:d],
            beta=vector[d : 2 * d],
            gamma=vector[2 * d : 2 * d + d * d].reshape(d, d),
            omega=vector[2 * d + d * d :].reshape(d, j),
        )

    def frobenius_sq(self) -> float:
        """Sum of squares of all parameter entries."""
        return float(np.dot(self.flatten(), self.flatten()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "D": self.dimension,
            "J": self.n_independent,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "omega": self.omega.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratorParams:
        params = cls(
            alpha=np.asarray(data["alpha"], dtype=float),
            beta=np.asarray(data["beta"], dtype=float),
            gamma=np.asarray(data["gamma"], dtype=float),
            omega=np.asarray(data["omega"], dtype=float).reshape(
                int(data["D"]), int(data["J"])
            ),
        )
        if params.dimension != int(data["D"]):
            raise ValueError(f"D={data['D']} does not match alpha length {params.dimension}")
        return params


@dataclass(frozen=True)
class LatentSpec:
    """Latent distribution for one example: D adaptive plus J independent uniforms."""

    d_adaptive: int
    j_independent: int
    delta: np.ndarray
    independent_halfwidth: float = 1.0

    def __post_init__(self) -> None:
        delta = _frozen(self.delta)
        if delta.shape != (self.d_adaptive,):
            raise ValueError(f"delta must have length {self.d_adaptive}, got {delta.shape}")
        if np.any(delta < 0) or not np.all(np.isfinite(delta)):
            raise ValueError("delta must be finite and non-negative")
        if self.j_independent < 0:
            raise ValueError("j_independent must be >= 0")
        if self.independent_halfwidth <= 0:
            raise ValueError("independent_halfwidth must be positive")
        object.__setattr__(self, "delta", delta)

    @property
    def n_latent(self) -> int:
        """K = D + J."""
        return self.d_adaptive + self.j_independent


def ensemble_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension member mean and half-range of a D×M ensemble matrix.

    Raises:
        ValueError: fewer than two members
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError(f"ensemble must be D×M with M >= 2, got shape {x.shape}")
    return x.mean(axis=1), (x.max(axis=1) - x.min(axis=1)) / 2.0


def sample_latent(
    spec: LatentSpec,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw latent vectors z = [u, v].

    Returns a K-vector when ``size`` is None, else a size×K matrix. One
    U(-1, 1) draw per entry is scaled by delta (adaptive part) or the
    independent half-width, so two specs that differ only in delta consume the
    generator identically.
    """
    n = 1 if size is None else size
    z = rng.uniform(-1.0, 1.0, size=(n, spec.n_latent))
    z[:, : spec.d_adaptive] *= spec.delta
    z[:, spec.d_adaptive :] *= spec.independent_halfwidth
    return z[0] if size is None else z


def generate(theta: GeneratorParams, xbar: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Map ensemble mean and latent sample(s) to scenario(s).

    ``z`` may be a K-vector or an S×K matrix; the result has matching leading shape.

    Raises:
        ValueError: dimension mismatch
    """
    xbar = np.asarray(xbar, dtype=float)
    z = np.asarray(z, dtype=float)
    d, j = theta.dimension, theta.n_independent
    if xbar.shape != (d,):
        raise ValueError(f"xbar must have length {d}, got {xbar.shape}")
    if z.shape[-1] != d + j:
        raise ValueError(f"latent vectors must have length {d + j}, got {z.shape[-1]}")
    return theta.alpha + theta.beta * xbar + z[..., :d] @ theta.gamma.T + z[..., d:] @ theta.omega.T


@dataclass(frozen=True)
class TrainConfig:
    """IGEP training hyperparameters.

    ``fixed_delta`` replaces the per-example half-ranges by a constant
    (the independent-latent variant uses 2.0).
    """

    batch_size: int = 3
    scenarios_per_example: int = 25
    regularization: float = 0.0
    epochs: int = 100
    j_independent: int = 10
    learning_rate: float = 0.001
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-7
    seed: int = 0
    fixed_delta: float | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.scenarios_per_example < 2:
            raise ValueError(
                "scenarios_per_example must be >= 2 for the unbiased diversity term, "
                f"got {self.scenarios_per_example}"
            )
        if self.regularization < 0:
            raise ValueError(f"regularization must be >= 0, got {self.regularization}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.j_independent < 0:
            raise ValueError(f"j_independent must be >= 0, got {self.j_independent}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (0.0 <= self.beta_1 < 1.0 and 0.0 <= self.beta_2 < 1.0):
            raise ValueError("Adam decay rates must be in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.fixed_delta is not None and self.fixed_delta < 0:
            raise ValueError(f"fixed_delta must be >= 0, got {self.fixed_delta}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class BatchItem(NamedTuple):
    """One training example with its pre-drawn S×K latent matrix."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray


def _safe_unit(vectors: np.ndarray, norms: np.ndarray) -> np.ndarray:
    # Zero-norm rows get subgradient 0
    out = np.zeros_like(vectors)
    nonzero = norms > 0
    out[nonzero] = vectors[nonzero] / norms[nonzero][:, None]
    return out


def _loss_and_grad(
    theta: GeneratorParams,
    batch: Sequence[BatchItem],
    cfg: TrainConfig,
    with_grad: bool = True,
) -> tuple[float, GeneratorParams | None]:
    if not batch:
        raise ValueError("batch is empty")
    d = theta.dimension
    d_alpha = np.zeros(d)
    d_beta = np.zeros(d)
    d_gamma = np.zeros((d, d))
    d_omega = np.zeros_like(theta.omega)
    total = 0.0

    for item in batch:
        xbar = np.asarray(item.x, dtype=float).mean(axis=1)
        y = np.asarray(item.y, dtype=float)
        z = np.asarray(item.z, dtype=float)
        n_scen = z.shape[0]
        if n_scen < 2:
            raise ValueError("each example needs at least 2 scenarios")
        if y.shape != (d,):
            raise ValueError(f"target must have length {d}, got {y.shape}")

        scenarios = generate(theta, xbar, z)
        errors = scenarios - y
        error_norms = np.linalg.norm(errors, axis=1)
        diffs = scenarios[:, None, :] - scenarios[None, :, :]
        diff_norms = np.linalg.norm(diffs, axis=2)
        pair_scale = 1.0 / (2.0 * n_scen * (n_scen - 1))
        total += error_norms.mean() - pair_scale * diff_norms.sum()

        if not with_grad:
            continue
        grad_data = _safe_unit(errors, error_norms) / n_scen
        units = np.zeros_like(diffs)
        nonzero = diff_norms > 0
        units[nonzero] = diffs[nonzero] / diff_norms[nonzero][:, None]
        # each unordered pair enters the double sum twice
        grad_div = 2.0 * pair_scale * units.sum(axis=1)
        d_scen = grad_data - grad_div

        column_sum = d_scen.sum(axis=0)
        d_alpha += column_sum
        d_beta += xbar * column_sum
        d_gamma += d_scen.T @ z[:, :d]
        d_omega += d_scen.T @ z[:, d:]

    n = len(batch)
    reg = cfg.regularization
    loss = total / n + reg * theta.frobenius_sq()
    if not with_grad:
        return float(loss), None
    grad = GeneratorParams(
        alpha=d_alpha / n + 2.0 * reg * theta.alpha,
        beta=d_beta / n + 2.0 * reg * theta.beta,
        gamma=d_gamma / n + 2.0 * reg * theta.gamma,
        omega=d_omega / n + 2.0 * reg * theta.omega,
    )
    return float(loss), grad


def es_loss(theta: GeneratorParams, batch: Sequence[BatchItem], cfg: TrainConfig) -> float:
    """Batch-mean energy score of generated scenarios plus lambda·||theta||²_F (β=1)."""
    loss, _ = _loss_and_grad(theta, batch, cfg, with_grad=False)
    return loss


def grad_es_loss(
    theta: GeneratorParams, batch: Sequence[BatchItem], cfg: TrainConfig
) -> GeneratorParams:
    """Closed-form gradient of ``es_loss`` with respect to theta."""
    _, grad = _loss_and_grad(theta, batch, cfg)
    assert grad is not None
    return grad


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators and step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, n_params: int) -> AdamState:
        return cls(m=np.zeros(n_params), v=np.zeros(n_params), t=0)


def adam_step(
    theta: GeneratorParams,
    grad: GeneratorParams,
    state: AdamState,
    eta: float = 0.001,
    beta_1: float = 0.9,
    beta_2: float = 0.999,
    epsilon: float = 1e-7,
) -> tuple[GeneratorParams, AdamState]:
    """One Adam update with bias correction folded into the step size.

    Uses lr_t = eta·sqrt(1-beta_2^t)/(1-beta_1^t) and
    theta -= lr_t·m/(sqrt(v) + epsilon).
    """
    g = grad.flatten()
    t = state.t + 1
    m = beta_1 * state.m + (1.0 - beta_1) * g
    v = beta_2 * state.v + (1.0 - beta_2) * g * g
    lr_t = eta * np.sqrt(1.0 - beta_2**t) / (1.0 - beta_1**t)
    updated = theta.flatten() - lr_t * m / (np.sqrt(v) + epsilon)
    return (
        GeneratorParams.unflatten(updated, theta.dimension, theta.n_independent),
        AdamState(m=m, v=v, t=t),
    )


def _example_arrays(
    data: Sequence[tuple[EnsembleForecast | np.ndarray, np.ndarray]],
    fixed_delta: float | None,
) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
    xs = [np.asarray(getattr(f, "values", f), dtype=float) for f, _ in data]
    ys = np.array([np.asarray(y, dtype=float) for _, y in data])
    deltas = np.array([ensemble_stats(x)[1] for x in xs])
    if fixed_delta is not None:
        deltas = np.full_like(deltas, fixed_delta)
    return xs, ys, deltas


def train(
    data: Sequence[tuple[EnsembleForecast | np.ndarray, np.ndarray]],
    cfg: TrainConfig,
    *,
    rng: np.random.Generator | None = None,
    history: list[float] | None = None,
) -> GeneratorParams:
    """Fit generator parameters by minibatch Adam on the energy-score loss.

    Inputs and targets must already be standardized. Batches are reshuffled
    every epoch and latents are redrawn for every batch, all from ``rng``
    (defaults to a generator seeded with ``cfg.seed``).

    Args:
        data: (ensemble forecast or D×M matrix, realized D-vector) pairs
        cfg: Training configuration
        rng: Random generator; owns all randomness of the run
        history: If given, receives the mean batch loss of every epoch

    Raises:
        ValueError: empty data
        TrainingDivergedError: non-finite loss (names epoch and batch)
    """
    if not data:
        raise ValueError("train needs at least one example")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    xs, ys, deltas = _example_arrays(data, cfg.fixed_delta)
    n_examples, dim = ys.shape

    theta = GeneratorParams.initial(dim, cfg.j_independent)
    state = AdamState.initial(theta.n_params)
    logger.info(
        f"Training IGEP: {n_examples} examples, D={dim}, J={cfg.j_independent}, "
        f"{theta.n_params} parameters, {cfg.epochs} epochs"
    )

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n_examples)
        losses = []
        for batch_no, start in enumerate(range(0, n_examples, cfg.batch_size), start=1):
            batch = [
                BatchItem(
                    x=xs[i],
                    y=ys[i],
                    z=sample_latent(
                        LatentSpec(dim, cfg.j_independent, deltas[i]),
                        rng,
                        size=cfg.scenarios_per_example,
                    ),
                )
                for i in order[start : start + cfg.batch_size]
            ]
            loss, grad = _loss_and_grad(theta, batch, cfg)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_no, loss)
            assert grad is not None
            theta, state = adam_step(
                theta, grad, state, cfg.learning_rate, cfg.beta_1, cfg.beta_2, cfg.epsilon
            )
            losses.append(loss)
            logger.trace(f"epoch {epoch} batch {batch_no}: loss {loss:.6f}")  # type: ignore[attr-defined]
        epoch_loss = float(np.mean(losses))
        if history is not None:
            history.append(epoch_loss)
        logger.debug(f"epoch {epoch}/{cfg.epochs}: mean loss {epoch_loss:.6f}")

    return theta


def predict_scenarios(
    theta: GeneratorParams,
    forecast: EnsembleForecast,
    n_scenarios: int,
    standardizer: Standardizer,
    rng: np.random.Generator,
    fixed_delta: float | None = None,
) -> ScenarioSet:
    """Generate S price scenarios for one day from its raw ensemble forecast."""
    if n_scenarios < 1:
        raise ValueError(f"n_scenarios must be >= 1, got {n_scenarios}")
    xbar, delta = ensemble_stats(standardizer.apply(forecast.values))
    if fixed_delta is not None:
        delta = np.full_like(delta, fixed_delta)
    spec = LatentSpec(theta.dimension, theta.n_independent, delta)
    scenarios = generate(theta, xbar, sample_latent(spec, rng, size=n_scenarios))
    return ScenarioSet(day=forecast.day, scenarios=standardizer.invert(scenarios))


@dataclass
class IGEPModel:
    """Trained generator together with its standardizer and configuration."""

    config: TrainConfig = field(default_factory=TrainConfig)
    params: GeneratorParams | None = None
    standardizer: Standardizer | None = None
    loss_history: list[float] = field(default_factory=list)

    @property
    def is_fitted(self) -> bool:
        return self.params is not None and self.standardizer is not None

    def fit(
        self,
        forecasts: Sequence[EnsembleForecast],
        actuals: np.ndarray,
        standardizer: Standardizer | None = None,
        rng: np.random.Generator | None = None,
    ) -> IGEPModel:
        """Standardize with training-price statistics and train.

        Args:
            forecasts: Raw (EUR/MWh) ensemble forecasts of the training days
            actuals: N×D realized prices
            standardizer: Optional precomputed standardizer; defaults to the
                statistics of ``actuals``
            rng: Random generator; defaults to one seeded with ``config.seed``
        """
        actuals = np.asarray(actuals, dtype=float)
        if len(forecasts) != actuals.shape[0]:
            raise ValueError(f"{len(forecasts)} forecasts for {actuals.shape[0]} actuals")
        self.standardizer = standardizer or fit_standardizer(actuals)
        data = [
            (f.standardized(self.standardizer), self.standardizer.apply(y))
            for f, y in zip(forecasts, actuals)
        ]
        self.loss_history = []
        self.params = train(data, self.config, rng=rng, history=self.loss_history)
        return self

    def _require_fitted(self) -> tuple[GeneratorParams, Standardizer]:
        if self.params is None or self.standardizer is None:
            raise ValueError("IGEP model is not fitted")
        return self.params, self.standardizer

    def sample(
        self, forecast: EnsembleForecast, n_scenarios: int, rng: np.random.Generator
    ) -> ScenarioSet:
        params, standardizer = self._require_fitted()
        return predict_scenarios(
            params, forecast, n_scenarios, standardizer, rng, self.config.fixed_delta
        )

    def predictive_mean(self, forecast: EnsembleForecast) -> np.ndarray:
        """alpha + beta·xbar mapped back to prices."""
        params, standardizer = self._require_fitted()
        xbar = standardizer.apply(forecast.average)
        return np.asarray(standardizer.invert(params.alpha + params.beta * xbar))

    def to_dict(self) -> dict[str, Any]:
        params, standardizer = self._require_fitted()
        return {
            **params.to_dict(),
            "standardizer": standardizer.to_dict(),
            "seed": self.config.seed,
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> IGEPModel:
        config = TrainConfig(**data["config"])
        return cls(
            config=replace(config, seed=int(data.get("seed", config.seed))),
            params=GeneratorParams.from_dict(data),
            standardizer=Standardizer.from_dict(data["standardizer"]),
        )

    def save_json(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))
        return path

    @classmethod
    def load_json(cls, path: Path) -> IGEPModel:
        return cls.from_dict(json.loads(Path(path).read_text()))
