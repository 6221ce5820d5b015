"""Score reports: long-format CSV and rich-rendered tables.

The CSV has one row per value with columns ``section`` (``method`` or
``expert``), ``name``, ``metric``, ``repeat`` and ``value``, written with full
float precision so that reading it back gives an identical report.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .ensemble import PointReport
from .logging_config import get_logger

logger = get_logger("report")

METRICS = ("ES", "CRPS", "RMSE")
POINT_METRICS = ("MAE", "RMSE")
REPORT_COLUMNS = ["section", "name", "metric", "repeat", "value"]


@dataclass
class ScoreReport:
    """Per-method per-repeat test scores plus per-expert point errors.

    ``scores[method][metric]`` lists one value per repeat in repeat order.
    """

    methods: list[str]
    repeats: int
    scores: dict[str, dict[str, list[float]]] = field(default_factory=dict)
    experts: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.repeats < 1:
            raise ValueError(f"Invalid repeats: {self.repeats}. Must be >= 1")
        for method in self.methods:
            self.scores.setdefault(method, {metric: [] for metric in METRICS})

    def add(self, method: str, metric: str, value: float) -> None:
        self.scores[method][metric].append(float(value))

    def values(self, method: str, metric: str) -> np.ndarray:
        return np.asarray(self.scores[method][metric], dtype=float)

    def mean(self, method: str, metric: str) -> float:
        return float(np.mean(self.values(method, metric)))

    def std(self, method: str, metric: str) -> float:
        """Population standard deviation over repeats (0 for a single repeat)."""
        return float(np.std(self.values(method, metric), ddof=0))

    @property
    def is_complete(self) -> bool:
        return all(
            len(self.scores[m][metric]) == self.repeats for m in self.methods for metric in METRICS
        )

    def to_frame(self) -> pd.DataFrame:
        rows = [
            ("method", method, metric, repeat, value)
            for method in self.methods
            for metric in METRICS
            for repeat, value in enumerate(self.scores[method][metric])
        ]
        rows += [
            ("expert", name, metric, 0, errors[metric])
            for name, errors in self.experts.items()
            for metric in POINT_METRICS
        ]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> ScoreReport:
        methods_frame = frame[frame["section"] == "method"]
        methods = list(dict.fromkeys(methods_frame["name"]))
        repeats = int(methods_frame["repeat"].max()) + 1 if len(methods_frame) else 1
        report = cls(methods=methods, repeats=repeats)
        for row in methods_frame.sort_values("repeat", kind="stable").itertuples(index=False):
            report.add(row.name, row.metric, row.value)
        for row in frame[frame["section"] == "expert"].itertuples(index=False):
            report.experts.setdefault(row.name, {})[row.metric] = float(row.value)
        return report

    def write_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def read_csv(cls, path: Path) -> ScoreReport:
        frame = pd.read_csv(
            path,
            dtype={"section": str, "name": str, "metric": str},
            float_precision="round_trip",
        )
        return cls.from_frame(frame)


def _render(*renderables: object, width: int = 120) -> str:
    console = Console(file=io.StringIO(), width=width, color_system=None, force_terminal=False)
    for renderable in renderables:
        console.print(renderable)
    return console.file.getvalue()


def score_table(report: ScoreReport) -> Table:
    """Rows = metrics, columns = methods, cells = mean ± std (3 decimals)."""
    table = Table(show_header=True, header_style="bold")
    table.add_column("Metric", style="cyan")
    for method in report.methods:
        table.add_column(method, justify="right")
    for metric in METRICS:
        table.add_row(
            metric,
            *(
                f"{report.mean(m, metric):.3f} ± {report.std(m, metric):.3f}"
                for m in report.methods
            ),
        )
    return table


def report_scores(
    report: ScoreReport,
    csv_path: Path | None = None,
    txt_path: Path | None = None,
) -> str:
    """Format the score table as text; optionally write the CSV and text files.

    Raises:
        ValueError: the report is missing repeats
    """
    if not report.is_complete:
        raise ValueError("score report is incomplete")
    title = Panel(
        f"[bold]Test-set scores[/bold] ({report.repeats} repeat(s), mean ± std)",
        expand=False,
    )
    text = _render(title, score_table(report))
    if csv_path is not None:
        report.write_csv(csv_path)
        logger.info(f"Wrote score report CSV to {csv_path}")
    if txt_path is not None:
        txt_path.parent.mkdir(parents=True, exist_ok=True)
        txt_path.write_text(text)
        logger.info(f"Wrote score report to {txt_path}")
    return text


def point_table(point: PointReport) -> Table:
    """Rows = MAE/RMSE, columns = experts and AVG (2 decimals)."""
    table = Table(show_header=True, header_style="bold")
    table.add_column("Metric", style="cyan")
    for name in point.names:
        table.add_column(name, justify="right")
    for metric in POINT_METRICS:
        values = point.mae if metric == "MAE" else point.rmse
        table.add_row(metric, *(f"{values[n]:.2f}" for n in point.names))
    return table


def report_point_forecasts(point: PointReport, txt_path: Path | None = None) -> str:
    """Point-forecast error table with the AVG-vs-best-member improvement."""
    summary = (
        f"AVG vs best member ({point.best_member}): "
        f"MAE {point.improvement_pct('mae'):+.1f}%, RMSE {point.improvement_pct('rmse'):+.1f}%"
    )
    text = _render(point_table(point), summary)
    if txt_path is not None:
        txt_path.parent.mkdir(parents=True, exist_ok=True)
        txt_path.write_text(text)
        logger.info(f"Wrote point-forecast report to {txt_path}")
    return text
