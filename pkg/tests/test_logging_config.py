"""Tests for logging setup and the per-run log file."""

from __future__ import annotations

import io
import logging
import sys
from collections.abc import Iterator
from logging.handlers import RotatingFileHandler
from pathlib import Path

import pytest
from rich.logging import RichHandler

from igep_scenarios.config import LoggingConfig
from igep_scenarios.logging_config import (
    PACKAGE_LOGGER,
    TRACE,
    get_logger,
    resolve_level,
    run_log,
    setup_logging,
)


class _Terminal(io.StringIO):
    def isatty(self) -> bool:
        return True


@pytest.fixture(autouse=True)
def package_logger() -> Iterator[logging.Logger]:
    logger = logging.getLogger(PACKAGE_LOGGER)
    yield logger
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)


class TestLevels:
    """Tests for level names and module loggers."""

    def test_trace_level(self) -> None:
        assert resolve_level("trace") == TRACE == 5
        assert logging.getLevelName(TRACE) == "TRACE"

    def test_standard_levels(self) -> None:
        assert resolve_level("warning") == logging.WARNING

    def test_module_logger_prefix(self) -> None:
        assert get_logger("igep").name == "igep_scenarios.igep"
        assert get_logger("igep_scenarios.igep").name == "igep_scenarios.igep"


class TestSetupLogging:
    """Tests for setup_logging."""

    def test_rotating_file(self, tmp_path: Path) -> None:
        config = LoggingConfig(level="DEBUG", file=str(tmp_path / "logs" / "igep.log"))
        logger = setup_logging(config)
        assert logger.level == logging.DEBUG
        assert any(isinstance(h, RotatingFileHandler) for h in logger.handlers)
        get_logger("backtest").debug("stage data")
        for handler in logger.handlers:
            handler.flush()
        assert "DEBUG [igep_scenarios.backtest] stage data" in (tmp_path / "logs" / "igep.log").read_text()

    def test_no_handlers_without_file_or_tty(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(sys, "stderr", io.StringIO())
        assert setup_logging(LoggingConfig(level="INFO")).handlers == []

    def test_console_on_tty(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(sys, "stderr", _Terminal())
        handlers = setup_logging(LoggingConfig(level="INFO")).handlers
        assert [type(h) for h in handlers] == [RichHandler]
        assert handlers[0].level == logging.INFO

    def test_override_wins(self) -> None:
        assert setup_logging(LoggingConfig(level="INFO"), "TRACE").level == TRACE

    def test_repeat_call_replaces_handlers(self, tmp_path: Path) -> None:
        config = LoggingConfig(file=str(tmp_path / "igep.log"))
        setup_logging(config)
        assert len(setup_logging(config).handlers) == 1


class TestRunLog:
    """Tests for the per-run log file."""

    def test_records_info_below_configured_level(
        self, tmp_path: Path, package_logger: logging.Logger
    ) -> None:
        package_logger.setLevel(logging.WARNING)
        path = tmp_path / "run-1" / "backtest.log"
        with run_log(path):
            get_logger("backtest").info("Backtest run-1 complete")
            get_logger("igep").debug("hidden")
        text = path.read_text()
        assert "INFO  [igep_scenarios.backtest] Backtest run-1 complete" in text
        assert "hidden" not in text

    def test_restores_logger(self, tmp_path: Path, package_logger: logging.Logger) -> None:
        package_logger.setLevel(logging.ERROR)
        with run_log(tmp_path / "backtest.log") as handler:
            assert handler in package_logger.handlers
            assert package_logger.level == logging.INFO
        assert handler not in package_logger.handlers
        assert package_logger.level == logging.ERROR

    def test_detached_after_error(self, tmp_path: Path, package_logger: logging.Logger) -> None:
        with pytest.raises(RuntimeError):
            with run_log(tmp_path / "backtest.log"):
                raise RuntimeError("boom")
        assert package_logger.handlers == []

    def test_keeps_lower_level(self, tmp_path: Path, package_logger: logging.Logger) -> None:
        package_logger.setLevel(logging.DEBUG)
        with run_log(tmp_path / "backtest.log"):
            assert package_logger.level == logging.DEBUG
