"""Main entry point for igep-scenarios.

Subcommands
-----------
synth     Write the synthetic market CSV (``--out`` is the CSV path).
ensemble  Rolling expert forecasts: ``<out>/<run-id>/ensemble.csv`` and
          ``point_report.txt``.
backtest  Full pipeline: ensemble, every probabilistic method ``repeats``
          times, ``report.csv``/``report.txt``, scenarios, models, plots.
plot      Fan chart of one day from an ensemble CSV and a scenario CSV.
score     Re-score the scenario CSVs of a finished run.

Exit code 0 on success. Failures print ``Error [<stage>]: <message>`` to
stderr and return 1.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

from dotenv import load_dotenv
from rich.console import Console

from .cli import CLIArgs, Command, parse_args
from .config import Config, find_config_file, load_config
from .errors import IGEPError, StageError
from .logging_config import get_logger, setup_logging

logger = get_logger("main")


def _load(args: CLIArgs) -> Config:
    """Locate and load the config, then apply CLI overrides."""
    if args.config_path is not None:
        config_path = args.config_path
    else:
        config_path = find_config_file()

    # Load .env from config directory before parsing config
    # so that ${VAR} in config.json can be expanded
    env_file = config_path.parent / ".env"
    if env_file.exists():
        load_dotenv(env_file)

    config = load_config(config_path)
    if args.seed is not None:
        config.backtest = replace(config.backtest, base_seed=args.seed, seeds=None)
        config.data.synthetic = replace(config.data.synthetic, seed=args.seed)
        config.igep = replace(config.igep, seed=args.seed)
    if args.out is not None and args.command in (Command.ENSEMBLE, Command.BACKTEST):
        config.backtest.output.dir = str(args.out)
    logger.debug(f"Config loaded from: {config_path}")
    return config


def run_synth(config: Config, args: CLIArgs, console: Console) -> int:
    from .synthetic import generate_synthetic

    synthetic = config.data.synthetic
    if args.days is not None:
        synthetic = replace(synthetic, n_days=args.days)
    if args.start is not None:
        synthetic = replace(synthetic, start=args.start)
    out = args.out or Path("data") / "synthetic.csv"
    dataset = generate_synthetic(synthetic)
    dataset.write_csv(out, config.data.schema)
    console.print(f"Wrote {dataset.n_days} days of synthetic market data to {out}")
    return 0


def run_ensemble(config: Config, args: CLIArgs, console: Console) -> int:
    from .backtest import build_ensemble, prepare_market
    from .ensemble import point_report
    from .paths import RunLayout
    from .report import report_point_forecasts

    layout = RunLayout(
        config.backtest.output.expanded_dir, args.run_id or f"run-{config.backtest.base_seed}"
    ).ensure()
    forecasts, actuals = build_ensemble(config, prepare_market(config), layout)
    text = report_point_forecasts(point_report(forecasts, actuals), layout.point_report_txt)
    console.print(text, markup=False, highlight=False)
    console.print(f"Wrote {layout.ensemble_csv}")
    return 0


def run_backtest_command(config: Config, args: CLIArgs, console: Console) -> int:
    from .backtest import run_backtest
    from .report import score_table

    result = run_backtest(config, run_id=args.run_id)
    console.print(score_table(result.report))
    console.print(f"Artifacts in {result.layout.run_dir}")
    return 0


def run_plot(config: Config, args: CLIArgs, console: Console) -> int:
    from .core import read_scenarios_csv
    from .ensemble import read_ensemble_csv
    from .plotting import plot_scenarios

    forecasts, actuals = read_ensemble_csv(args.ensemble_csv)
    by_day = {f.day: (f, a) for f, a in zip(forecasts, actuals)}
    if args.day not in by_day:
        raise StageError("plot", f"no ensemble forecast in {args.ensemble_csv}", args.day)
    forecast, actual = by_day[args.day]
    scenarios = read_scenarios_csv(args.scenarios_csv, args.day) if args.scenarios_csv else None
    out = args.out or Path(f"{args.day.isoformat()}.svg")
    try:
        plot_scenarios(scenarios, forecast, actual, out)
    except OSError as e:
        raise StageError("plot", str(e), args.day) from e
    console.print(f"Wrote {out}")
    return 0


def run_score(config: Config, args: CLIArgs, console: Console) -> int:
    from rich.table import Table

    from .backtest import rescore_run

    results = rescore_run(args.run_dir, config.backtest.scoring)
    table = Table(show_header=True, header_style="bold")
    table.add_column("Method", style="cyan")
    table.add_column("Days", justify="right")
    table.add_column("ES", justify="right")
    table.add_column("CRPS", justify="right")
    for r in results:
        table.add_row(r.method, str(r.n_days), f"{r.es:.3f}", f"{r.crps:.3f}")
    console.print(table)
    return 0


_HANDLERS = {
    Command.SYNTH: run_synth,
    Command.ENSEMBLE: run_ensemble,
    Command.BACKTEST: run_backtest_command,
    Command.PLOT: run_plot,
    Command.SCORE: run_score,
}


def main(argv: list[str] | None = None) -> int:
    """Main entry point.

    Returns:
        Exit code (0 for success, non-zero for error)
    """
    args = parse_args(argv)
    console = Console()

    try:
        config = _load(args)
    except FileNotFoundError as e:
        print(f"Error [config]: {e}", file=sys.stderr)
        print("Create a config/config.json file or specify path with --config", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"Error [config]: {e}", file=sys.stderr)
        return 1

    setup_logging(config.logging, args.log_level)
    logger.info(f"igep-scenarios {args.command.value} starting")

    try:
        return _HANDLERS[args.command](config, args, console)
    except StageError as e:
        where = f"{e.day.isoformat()}: " if e.day is not None else ""
        print(f"Error [{e.stage}]: {where}{e.detail}", file=sys.stderr)
        logger.error(f"{args.command.value} failed: {e}")
        return 1
    except (IGEPError, ValueError, OSError) as e:
        print(f"Error [{args.command.value}]: {e}", file=sys.stderr)
        logger.error(f"{args.command.value} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
