"""Logging for igep-scenarios.

Everything logs below the ``igep_scenarios`` package logger. Three sinks
exist:

    console        rich handler on stderr, only when stderr is a TTY
    logging.file   optional rotating file shared by all runs
    backtest.log   per-run file in ``out/<run-id>/``, attached by
                   ``run_log`` for the duration of one backtest

Per-batch IGEP training losses go out at the extra TRACE level (5).
"""

from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import TYPE_CHECKING, Iterator

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

if TYPE_CHECKING:
    from .config import LoggingConfig

PACKAGE_LOGGER = "igep_scenarios"
FILE_FORMAT = "%(asctime)s %(levelname)-5s [%(name)s] %(message)s"
FILE_DATEFMT = "%Y-%m-%d %H:%M:%S"

TRACE = 5
logging.addLevelName(TRACE, "TRACE")


def trace(self: logging.Logger, message: str, *args: object, **kwargs: object) -> None:
    """Log a message at TRACE level."""
    if self.isEnabledFor(TRACE):
        self._log(TRACE, message, args, **kwargs)


logging.Logger.trace = trace  # type: ignore[attr-defined]


def resolve_level(level_name: str) -> int:
    """Map a level name (including TRACE) to its numeric value."""
    if level_name.upper() == "TRACE":
        return TRACE
    return getattr(logging, level_name.upper())


def _file_formatter() -> logging.Formatter:
    return logging.Formatter(FILE_FORMAT, datefmt=FILE_DATEFMT)


def _console_handler(level: int) -> logging.Handler:
    console = Console(stderr=True, theme=Theme({"logging.level.trace": "bright_black"}))
    handler = RichHandler(
        console=console,
        level=level,
        show_path=False,
        markup=False,
        log_time_format="%H:%M:%S",
    )
    return handler


def setup_logging(
    config: LoggingConfig,
    level_override: str | None = None,
) -> logging.Logger:
    """Configure the package logger for one CLI invocation.

    Replaces any handlers from an earlier call. ``logging.file`` (after
    ``~``/``${VAR}`` expansion) gets a rotating handler; an empty value
    means no shared log file. Scheduled batch runs without a TTY therefore
    write only to that file and to their run's ``backtest.log``.

    Args:
        config: Logging configuration
        level_override: Optional level from the CLI ``--log-level`` flag

    Returns:
        The package logger
    """
    level = resolve_level(level_override or config.level)

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)
    logger.handlers.clear()

    if config.file:
        log_path = config.expanded_file
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=config.max_bytes,
            backupCount=config.backup_count,
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(_file_formatter())
        logger.addHandler(file_handler)

    if sys.stderr.isatty():
        logger.addHandler(_console_handler(level))

    return logger


@contextmanager
def run_log(path: Path, level: int = logging.INFO) -> Iterator[logging.Handler]:
    """Copy package records at ``level`` and above into ``path`` while active.

    The package logger is lowered to ``level`` if needed and restored on
    exit; the other handlers keep their own levels.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    previous_level = logger.level
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(_file_formatter())
    if logger.getEffectiveLevel() > level:
        logger.setLevel(level)
    logger.addHandler(handler)
    try:
        yield handler
    finally:
        logger.removeHandler(handler)
        handler.close()
        logger.setLevel(previous_level)


def get_logger(name: str) -> logging.Logger:
    """Module logger below the package logger, e.g. ``"igep"`` → ``igep_scenarios.igep``."""
    if name.startswith(f"{PACKAGE_LOGGER}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{PACKAGE_LOGGER}.{name}")
