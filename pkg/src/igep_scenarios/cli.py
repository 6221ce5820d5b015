"""Command-line interface for igep-scenarios."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Callable

import click

from . import __version__


class Command(Enum):
    """Subcommands of the CLI."""

    SYNTH = "synth"  # write a synthetic market CSV
    ENSEMBLE = "ensemble"  # rolling expert forecasts + point report
    BACKTEST = "backtest"  # full evaluation pipeline
    PLOT = "plot"  # fan chart from existing CSVs
    SCORE = "score"  # re-score the scenario CSVs of a finished run


@dataclass
class CLIArgs:
    """Parsed command-line arguments."""

    command: Command
    config_path: Path | None
    seed: int | None
    out: Path | None
    log_level: str | None
    run_id: str | None = None
    days: int | None = None
    start: date | None = None
    ensemble_csv: Path | None = None
    scenarios_csv: Path | None = None
    day: date | None = None
    run_dir: Path | None = None


class _DateType(click.ParamType):
    name = "date"

    def convert(self, value: Any, param: click.Parameter | None, ctx: click.Context | None) -> date:
        if isinstance(value, date):
            return value
        try:
            return date.fromisoformat(value)
        except ValueError:
            self.fail(f"{value!r} is not an ISO date (YYYY-MM-DD)", param, ctx)


DATE = _DateType()


def common_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    """--config, --seed, --out and --log-level, shared by every subcommand."""
    fn = click.option(
        "--log-level",
        "-l",
        "log_level",
        type=click.Choice(["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=True),
        default=None,
        help="Override log level from config",
    )(fn)
    fn = click.option(
        "--out",
        "-o",
        "out",
        type=click.Path(path_type=Path),
        default=None,
        help="Output location (directory, or file for synth/plot)",
    )(fn)
    fn = click.option(
        "--seed",
        "-s",
        "seed",
        type=int,
        default=None,
        help="Override the base seed from config",
    )(fn)
    fn = click.option(
        "--config",
        "-c",
        "config_path",
        type=click.Path(exists=False, path_type=Path),
        default=None,
        help="Path to config file (default: nearest config/config.json)",
    )(fn)
    return fn


def _store(ctx: click.Context, command: Command, **kwargs: Any) -> None:
    ctx.obj["args"] = CLIArgs(command=command, **kwargs)


@click.group()
@click.version_option(version=__version__, prog_name="igep-scenarios")
@click.pass_context
def cli(ctx: click.Context) -> None:
    """Scenario generation from point-forecast ensembles.

    Examples:

    \b
      igep-scenarios synth --out data/synthetic.csv
      igep-scenarios ensemble --config config/config.json
      igep-scenarios backtest --seed 7 --run-id trial
      igep-scenarios plot --ensemble out/run-0/ensemble.csv \\
          --scenarios out/run-0/scenarios/igep/2017-03-01.csv --out fan.svg
      igep-scenarios score --run out/run-0
    """
    ctx.ensure_object(dict)


@cli.command()
@common_options
@click.option("--days", type=click.IntRange(min=1), default=None, help="Number of days")
@click.option("--start", type=DATE, default=None, help="First day (YYYY-MM-DD)")
@click.pass_context
def synth(ctx: click.Context, days: int | None, start: date | None, **common: Any) -> None:
    """Write a synthetic market CSV."""
    _store(ctx, Command.SYNTH, days=days, start=start, **common)


@cli.command()
@common_options
@click.option("--run-id", default=None, help="Run directory name (default: run-<seed>)")
@click.pass_context
def ensemble(ctx: click.Context, run_id: str | None, **common: Any) -> None:
    """Rolling expert forecasts and the point-forecast report."""
    _store(ctx, Command.ENSEMBLE, run_id=run_id, **common)


@cli.command()
@common_options
@click.option("--run-id", default=None, help="Run directory name (default: run-<seed>)")
@click.pass_context
def backtest(ctx: click.Context, run_id: str | None, **common: Any) -> None:
    """Full pipeline: ensemble, probabilistic methods, scores, plots."""
    _store(ctx, Command.BACKTEST, run_id=run_id, **common)


@cli.command()
@common_options
@click.option(
    "--ensemble",
    "ensemble_csv",
    type=click.Path(exists=False, path_type=Path),
    required=True,
    help="ensemble.csv of a run",
)
@click.option(
    "--scenarios",
    "scenarios_csv",
    type=click.Path(exists=False, path_type=Path),
    default=None,
    help="Scenario CSV (omit to plot ensemble and actual only)",
)
@click.option("--date", "day", type=DATE, required=True, help="Day to plot (YYYY-MM-DD)")
@click.pass_context
def plot(
    ctx: click.Context,
    ensemble_csv: Path,
    scenarios_csv: Path | None,
    day: date,
    **common: Any,
) -> None:
    """Fan chart of one day."""
    _store(
        ctx,
        Command.PLOT,
        ensemble_csv=ensemble_csv,
        scenarios_csv=scenarios_csv,
        day=day,
        **common,
    )


@cli.command()
@common_options
@click.option(
    "--run",
    "run_dir",
    type=click.Path(exists=False, path_type=Path),
    required=True,
    help="Run directory",
)
@click.pass_context
def score(ctx: click.Context, run_dir: Path, **common: Any) -> None:
    """Re-score the scenario CSVs of a finished run."""
    _store(ctx, Command.SCORE, run_dir=run_dir, **common)


def parse_args(args: list[str] | None = None) -> CLIArgs:
    """Parse command-line arguments.

    Invokes the Click group and returns the CLIArgs object its subcommand
    stored.

    Args:
        args: List of arguments (defaults to sys.argv[1:])

    Returns:
        Parsed CLIArgs object

    Raises:
        SystemExit: For --help, --version and usage errors
    """
    if args is None:
        args = sys.argv[1:]
    try:
        with cli.make_context("igep-scenarios", list(args), obj={}) as ctx:
            cli.invoke(ctx)
            return ctx.obj["args"]
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except click.ClickException as e:
        e.show()
        sys.exit(e.exit_code)
