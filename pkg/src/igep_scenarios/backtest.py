"""End-to-end backtest: data, rolling ensemble, probabilistic methods, scores.

Stages run in order and every failure is re-raised as ``StageError`` tagged
with the stage name (``data``, ``ensemble``, ``fit:<method>``,
``sample:<method>``, ``score``, ``report``, ``plot``) and the day when known.

Ensemble forecasts are computed once per run. Repeats re-randomize only the
training and sampling of the probabilistic methods; repeat r of every method
uses the same seed. Method/repeat tasks may run on a thread pool; results are
merged in (method, repeat) order so the report does not depend on scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from .config import Config
from .core import (
    EnsembleForecast,
    MarketDataset,
    ScenarioSet,
    ingest_csv,
    read_scenarios_csv,
    write_scenarios_csv,
)
from .ensemble import (
    expert_specs,
    point_report,
    read_ensemble_csv,
    rolling_forecast,
    write_ensemble_csv,
)
from .errors import StageError
from .logging_config import get_logger, run_log
from .methods import build_method
from .paths import RunLayout
from .plotting import plot_scenarios
from .report import ScoreReport, report_point_forecasts, report_scores
from .scoring import ScoringConfig, energy_score, mean_marginal_crps, rmse
from .synthetic import generate_synthetic

logger = get_logger("backtest")

T = TypeVar("T")


def _stage(name: str, fn: Callable[[], T], day: date | None = None) -> T:
    try:
        return fn()
    except StageError:
        raise
    except (ValueError, OSError, ArithmeticError, np.linalg.LinAlgError) as e:
        error_day = getattr(e, "day", None)
        if day is None and error_day is not None:
            raise StageError(name, getattr(e, "detail", str(e)), error_day) from e
        raise StageError(name, str(e), day) from e


@dataclass
class MethodRun:
    """Scores and artifacts of one method in one repeat."""

    method: str
    repeat: int
    seed: int
    es: float
    crps: float
    rmse: float
    model: dict = field(default_factory=dict, repr=False)
    plots: dict[date, ScenarioSet] = field(default_factory=dict, repr=False)


@dataclass
class BacktestResult:
    report: ScoreReport
    layout: RunLayout
    forecasts: list[EnsembleForecast]
    runs: list[MethodRun]


def load_dataset(config: Config) -> MarketDataset:
    """Read the configured CSV or generate the synthetic market."""
    path = config.data.expanded_csv_path
    if path is None:
        return generate_synthetic(config.data.synthetic)
    return ingest_csv(path, config.data.schema, fill_missing=config.data.fill_missing)


def select_plot_dates(forecasts: Sequence[EnsembleForecast]) -> list[date]:
    """Test days with the widest and the narrowest mean ensemble half-range."""
    widths = np.array([f.half_range.mean() for f in forecasts])
    widest = forecasts[int(np.argmax(widths))].day
    narrowest = forecasts[int(np.argmin(widths))].day
    return list(dict.fromkeys([widest, narrowest]))


def _run_method(
    config: Config,
    method_name: str,
    repeat: int,
    train: Sequence[EnsembleForecast],
    train_actuals: np.ndarray,
    test: Sequence[EnsembleForecast],
    test_actuals: np.ndarray,
    layout: RunLayout,
    plot_dates: set[date],
) -> MethodRun:
    bt = config.backtest
    seed = bt.seed_for(repeat)
    fit_rng = np.random.default_rng([seed, 0])
    sample_rng = np.random.default_rng([seed, 1])
    train_config = replace(config.igep, seed=seed)
    scoring: ScoringConfig = bt.scoring
    write_scenarios = bt.output.save_scenarios and repeat == 0

    # the probabilistic training window slides over past test days when refitting
    history = list(train) + list(test)
    history_actuals = np.concatenate([train_actuals, test_actuals])
    n_train = len(train)

    method = build_method(method_name, train_config)
    es_scores, crps_scores, means = [], [], []
    plots: dict[date, ScenarioSet] = {}
    model_dict: dict = {}
    for k, (forecast, actual) in enumerate(zip(test, test_actuals)):
        if k == 0 or (bt.prob_refit_days and k % bt.prob_refit_days == 0):
            window = slice(k, n_train + k)
            _stage(
                f"fit:{method_name}",
                lambda: method.fit(history[window], history_actuals[window], fit_rng),
                forecast.day,
            )
            if k == 0:
                model_dict = method.to_dict()
        scenario_set = _stage(
            f"sample:{method_name}",
            lambda: method.sample(forecast, bt.scenarios_per_day, sample_rng),
            forecast.day,
        )
        es_scores.append(
            _stage(
                "score",
                lambda: energy_score(scenario_set.scenarios, actual, scoring),
                forecast.day,
            )
        )
        crps_scores.append(
            _stage(
                "score",
                lambda: mean_marginal_crps(scenario_set.scenarios, actual, scoring),
                forecast.day,
            )
        )
        means.append(method.predictive_mean(forecast))
        if write_scenarios:
            write_scenarios_csv(scenario_set, layout.scenario_csv(method_name, forecast.day))
        if repeat == 0 and forecast.day in plot_dates:
            plots[forecast.day] = scenario_set

    run = MethodRun(
        method=method_name,
        repeat=repeat,
        seed=seed,
        es=float(np.mean(es_scores)),
        crps=float(np.mean(crps_scores)),
        rmse=_stage("score", lambda: rmse(np.array(means), test_actuals)),
        model=model_dict,
        plots=plots,
    )
    logger.info(
        f"{method_name} repeat {repeat} (seed {seed}): ES {run.es:.4f} "
        f"CRPS {run.crps:.4f} RMSE {run.rmse:.4f}"
    )
    return run


def prepare_market(config: Config, dataset: MarketDataset | None = None) -> MarketDataset:
    """Data stage: the configured (or given) dataset cut to the split period."""
    split = config.split

    def load() -> MarketDataset:
        source = dataset if dataset is not None else load_dataset(config)
        return source.window(split.ensemble_train_start, split.test_end)

    return _stage("data", load)


def build_ensemble(
    config: Config, market: MarketDataset, layout: RunLayout
) -> tuple[list[EnsembleForecast], np.ndarray]:
    """Ensemble stage: rolling forecasts from the probabilistic-train start to the
    test end, written to the run's ensemble CSV.

    Returns:
        The forecasts and the matching N×24 realized prices
    """
    split = config.split

    def run() -> tuple[list[EnsembleForecast], np.ndarray]:
        specs = expert_specs(config.ensemble.experts, config.ensemble.gb_kernel_sign)
        forecasts = rolling_forecast(
            market,
            specs,
            split.prob_train_start,
            split.test_end,
            window_days=config.ensemble.window_days,
            refit_every_days=config.ensemble.refit_every_days,
        )
        actuals = np.array(market.price[market.index_of(split.prob_train_start) :])
        write_ensemble_csv(forecasts, actuals, layout.ensemble_csv)
        return forecasts, actuals

    return _stage("ensemble", run)


def run_backtest(
    config: Config,
    run_id: str | None = None,
    dataset: MarketDataset | None = None,
) -> BacktestResult:
    """Run every configured method ``repeats`` times and write all artifacts.

    Args:
        config: Full configuration
        run_id: Name of the run directory (default ``run-<base_seed>``)
        dataset: Optional in-memory dataset replacing the configured source

    Raises:
        StageError: any stage failed (carries the stage name and day)
    """
    bt = config.backtest
    layout = RunLayout(bt.output.expanded_dir, run_id or f"run-{bt.base_seed}").ensure()
    with run_log(layout.log_file):
        try:
            return _execute(config, layout, dataset)
        except StageError as e:
            logger.error(f"Backtest {layout.run_id} failed: {e}")
            raise


def _execute(config: Config, layout: RunLayout, dataset: MarketDataset | None) -> BacktestResult:
    split, bt = config.split, config.backtest
    logger.info(f"Backtest {layout.run_id}: methods={bt.methods}, repeats={bt.repeats}")

    market = prepare_market(config, dataset)
    forecasts, actuals = build_ensemble(config, market, layout)
    n_train = split.prob_train_days
    train, test = forecasts[:n_train], forecasts[n_train:]
    train_actuals, test_actuals = actuals[:n_train], actuals[n_train:]
    points = point_report(forecasts, actuals)

    plot_dates = bt.output.plot_dates or select_plot_dates(test)
    by_day = {f.day: (f, a) for f, a in zip(test, test_actuals)}
    for day in plot_dates:
        if day not in by_day:
            raise StageError("plot", "plot date is outside the test period", day)
    plot_set = set(plot_dates)
    tasks = [(m, r) for m in bt.methods for r in range(bt.repeats)]

    def task(item: tuple[str, int]) -> MethodRun:
        method_name, repeat = item
        return _run_method(
            config, method_name, repeat, train, train_actuals, test, test_actuals, layout, plot_set
        )

    if bt.workers > 1:
        with ThreadPoolExecutor(max_workers=bt.workers) as pool:
            runs = list(pool.map(task, tasks))
    else:
        runs = [task(item) for item in tasks]

    report = ScoreReport(methods=list(bt.methods), repeats=bt.repeats)
    for run in runs:
        report.add(run.method, "ES", run.es)
        report.add(run.method, "CRPS", run.crps)
        report.add(run.method, "RMSE", run.rmse)
        if run.repeat == 0:
            path = layout.model_json(run.method)
            _stage("report", lambda: path.write_text(json.dumps(run.model, indent=2)))
    report.experts = {
        name: {"MAE": points.mae[name], "RMSE": points.rmse[name]} for name in points.names
    }

    _stage(
        "report",
        lambda: report_scores(report, csv_path=layout.report_csv, txt_path=layout.report_txt),
    )
    _stage("report", lambda: report_point_forecasts(points, txt_path=layout.point_report_txt))

    plot_method = "igep" if "igep" in bt.methods else bt.methods[0]
    first_run = next(r for r in runs if r.method == plot_method and r.repeat == 0)
    for day in plot_dates:
        forecast, actual = by_day[day]
        _stage(
            "plot",
            lambda: plot_scenarios(
                first_run.plots.get(day),
                forecast,
                actual,
                layout.plot_svg(day),
                title=f"{day.isoformat()} ({plot_method})",
            ),
            day,
        )

    logger.info(f"Backtest {layout.run_id} complete: {layout.run_dir}")
    return BacktestResult(report=report, layout=layout, forecasts=forecasts, runs=runs)


@dataclass(frozen=True)
class RescoredMethod:
    method: str
    n_days: int
    es: float
    crps: float


def rescore_run(run_dir: Path, scoring: ScoringConfig | None = None) -> list[RescoredMethod]:
    """Recompute mean ES and CRPS from the scenario CSVs of a finished run.

    Realized prices come from the run's ``ensemble.csv``.

    Raises:
        StageError: missing files or days without actuals
    """
    scoring = scoring or ScoringConfig()
    layout = RunLayout(run_dir.parent, run_dir.name)
    forecasts, actuals = _stage("score", lambda: read_ensemble_csv(layout.ensemble_csv))
    by_day = {f.day: a for f, a in zip(forecasts, actuals)}
    if not layout.scenarios_dir.is_dir():
        raise StageError("score", f"no scenarios directory in {run_dir}")

    results = []
    for method_dir in sorted(p for p in layout.scenarios_dir.iterdir() if p.is_dir()):
        es_scores, crps_scores = [], []
        for csv_path in sorted(method_dir.glob("*.csv")):
            scenario_set = _stage("score", lambda: read_scenarios_csv(csv_path))
            if scenario_set.day not in by_day:
                raise StageError("score", "no realized prices for scenario file", scenario_set.day)
            actual = by_day[scenario_set.day]
            es_scores.append(energy_score(scenario_set.scenarios, actual, scoring))
            crps_scores.append(mean_marginal_crps(scenario_set.scenarios, actual, scoring))
        if es_scores:
            results.append(
                RescoredMethod(
                    method=method_dir.name,
                    n_days=len(es_scores),
                    es=float(np.mean(es_scores)),
                    crps=float(np.mean(crps_scores)),
                )
            )
    return results
