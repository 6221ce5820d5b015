"""Path expansion and run-directory layout for igep-scenarios.

Path strings in the config may contain ``~`` and ``${VAR}``/``$VAR``. Unset
variables are left in place by ``os.path.expandvars`` so that the resulting
"file not found" error shows the unexpanded name.

A backtest run writes everything below ``<out>/<run-id>/``::

    report.csv  report.txt  ensemble.csv  point_report.txt
    scenarios/<method>/<date>.csv
    plots/<date>.svg
    models/<method>.json
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path


def expand_path(path: str) -> str:
    """Expand environment variables and ~ in a path string.

    Examples:
        >>> expand_path("~/runs")              # home directory
        >>> expand_path("${IGEP_DATA}/de.csv")  # IGEP_DATA if set
    """
    return os.path.expanduser(os.path.expandvars(path))


def expand_path_to_path(path: str) -> Path:
    """Expand path and return as Path object."""
    return Path(expand_path(path))


@dataclass(frozen=True)
class RunLayout:
    """File layout of one backtest run."""

    root: Path
    run_id: str

    @property
    def run_dir(self) -> Path:
        return self.root / self.run_id

    @property
    def report_csv(self) -> Path:
        return self.run_dir / "report.csv"

    @property
    def report_txt(self) -> Path:
        return self.run_dir / "report.txt"

    @property
    def ensemble_csv(self) -> Path:
        return self.run_dir / "ensemble.csv"

    @property
    def point_report_txt(self) -> Path:
        return self.run_dir / "point_report.txt"

    @property
    def scenarios_dir(self) -> Path:
        return self.run_dir / "scenarios"

    def scenario_csv(self, method: str, day: date) -> Path:
        return self.scenarios_dir / method / f"{day.isoformat()}.csv"

    def plot_svg(self, day: date) -> Path:
        return self.run_dir / "plots" / f"{day.isoformat()}.svg"

    def model_json(self, method: str) -> Path:
        return self.run_dir / "models" / f"{method}.json"

    @property
    def log_file(self) -> Path:
        return self.run_dir / "backtest.log"

    def ensure(self) -> RunLayout:
        """Create the run directory tree and return self."""
        for sub in ("scenarios", "plots", "models"):
            (self.run_dir / sub).mkdir(parents=True, exist_ok=True)
        return self

    @classmethod
    def from_config(cls, out_dir: str, run_id: str) -> RunLayout:
        return cls(root=expand_path_to_path(out_dir), run_id=run_id)
