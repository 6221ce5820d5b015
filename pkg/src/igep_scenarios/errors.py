"""Exception types for igep-scenarios.

All errors derive from ``IGEPError``, itself a ``ValueError``, so callers that
only care about bad input can keep catching ``ValueError``.
"""

from __future__ import annotations

from datetime import date


class IGEPError(ValueError):
    """Base class for all igep-scenarios errors."""


class DataParseError(IGEPError):
    """A CSV row could not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataStructureError(IGEPError):
    """The dataset violates a structural invariant (hours per day, gaps, lags)."""

    def __init__(self, message: str, day: date | None = None) -> None:
        self.day = day
        self.detail = message
        if day is not None:
            message = f"{day.isoformat()}: {message}"
        super().__init__(message)


class TrainingDivergedError(IGEPError):
    """The IGEP training loss became non-finite."""

    def __init__(self, epoch: int, batch: int, loss: float) -> None:
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"non-finite training loss {loss!r} at epoch {epoch}, batch {batch}"
        )


class StageError(IGEPError):
    """A backtest stage failed; carries the stage name and day if known."""

    def __init__(self, stage: str, message: str, day: date | None = None) -> None:
        self.stage = stage
        self.day = day
        self.detail = message
        where = f" on {day.isoformat()}" if day is not None else ""
        super().__init__(f"[{stage}]{where} {message}")
