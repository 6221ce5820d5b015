"""Static 24-hour scenario fan charts (SVG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .core import EnsembleForecast, ScenarioSet  # noqa: E402
from .logging_config import get_logger  # noqa: E402

logger = get_logger("plotting")

# fixed ids and no timestamp give byte-stable SVG output
_SVG_RC = {"svg.hashsalt": "igep-scenarios", "svg.fonttype": "path"}


def plot_scenarios(
    scenarios: ScenarioSet | None,
    forecast: EnsembleForecast,
    actual: np.ndarray,
    out_path: Path,
    title: str | None = None,
) -> Path:
    """Fan chart of scenario trajectories, ensemble members and realized prices.

    ``scenarios`` may be None to draw only the ensemble and the actual price.

    Raises:
        OSError: the SVG could not be written
    """
    actual = np.asarray(actual, dtype=float)
    hours = np.arange(1, forecast.values.shape[0] + 1)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        try:
            if scenarios is not None:
                colors = plt.cm.viridis(np.linspace(0.0, 1.0, scenarios.n_scenarios))
                for row, color in zip(scenarios.scenarios, colors):
                    ax.plot(hours, row, color=color, alpha=0.25, linewidth=0.6)
            for m in range(forecast.n_members):
                ax.plot(
                    hours,
                    forecast.values[:, m],
                    color="black",
                    linewidth=1.0,
                    label="ensemble" if m == 0 else None,
                )
            ax.plot(hours, actual, color="tab:blue", linewidth=2.0, label="actual")
            ax.set_xlabel("hour")
            ax.set_ylabel("price [EUR/MWh]")
            ax.set_xlim(1, hours[-1])
            ax.set_title(title or forecast.day.isoformat())
            ax.legend(loc="upper left")
            fig.tight_layout()
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    logger.debug(f"Wrote fan chart {out_path}")
    return out_path
