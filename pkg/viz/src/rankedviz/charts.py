"""Chart builders over the harness CSV files.

Three chart kinds mirror the standard experiment readout: smoothed
objective curves per policy, the reward/prioritization decomposition, and
the Pareto frontier with one labeled point per trade-off weight.  Values
are plotted exactly as found in the CSV (seed-averaging and smoothing only,
no renormalization), so re-rendering the same input is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

CHART_KINDS = ("objective", "components", "pareto")

TIMESERIES_COLUMNS = ["policy", "lambda", "seed", "t"]
PARETO_COLUMNS = ["policy", "lambda", "reward", "prioritization"]

#: Matches the harness default smoothing half-life.
DEFAULT_HALF_LIFE = 20.0


class ChartDataError(ValueError):
    """The input CSV cannot produce the requested chart."""


@dataclass(frozen=True)
class ChartSpec:
    csv_path: str | Path
    kind: str
    out_path: str | Path
    lam: float | None = None
    half_life: float = DEFAULT_HALF_LIFE

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ChartDataError(f"kind must be one of {CHART_KINDS}, got {self.kind!r}")
        if not self.half_life > 0:
            raise ChartDataError("half_life must be positive")


def ema(series: np.ndarray, half_life: float) -> np.ndarray:
    alpha = 1.0 - 2.0 ** (-1.0 / half_life)
    return pd.Series(series).ewm(alpha=alpha, adjust=False).mean().to_numpy()


def _load(spec: ChartSpec, value_columns: list[str]) -> pd.DataFrame:
    path = Path(spec.csv_path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise ChartDataError(f"no such file: {path}") from None
    except pd.errors.EmptyDataError:
        raise ChartDataError(f"{path} is empty") from None
    required = PARETO_COLUMNS if spec.kind == "pareto" else TIMESERIES_COLUMNS + value_columns
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ChartDataError(f"{path} is missing columns: {', '.join(missing)}")
    if frame.empty:
        raise ChartDataError(f"{path} has no data rows")
    if spec.lam is not None:
        frame = frame[np.isclose(frame["lambda"], spec.lam)]
        if frame.empty:
            raise ChartDataError(f"no rows match lambda={spec.lam}")
    return frame


def _seed_mean(frame: pd.DataFrame, column: str) -> pd.DataFrame:
    return (
        frame.groupby(["policy", "lambda", "t"], sort=True)[column]
        .mean()
        .reset_index()
        .sort_values(["policy", "lambda", "t"])
    )


def _series_label(policy: str, lam: float, multiple_lambdas: bool) -> str:
    return f"{policy} (lambda={lam:g})" if multiple_lambdas else policy


def build_chart(spec: ChartSpec):
    """Return (figure, metadata).  Metadata includes the point labels drawn
    on a pareto chart so callers can verify them without parsing the image."""
    if spec.kind == "pareto":
        frame = _load(spec, PARETO_COLUMNS)
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        labels = []
        for policy, sub in frame.groupby("policy", sort=True):
            sub = sub.sort_values("lambda")
            ax.plot(sub["reward"], sub["prioritization"], marker="o", label=policy)
            for _, row in sub.iterrows():
                text = f"{row['lambda']:g}"
                ax.annotate(
                    text,
                    (row["reward"], row["prioritization"]),
                    textcoords="offset points",
                    xytext=(5, 4),
                    fontsize=8,
                )
                labels.append(text)
        ax.set_xlabel("reward")
        ax.set_ylabel("prioritization")
        ax.set_title("reward / prioritization frontier")
        ax.legend()
        fig.tight_layout()
        return fig, {"labels": labels, "rows": len(frame)}

    value_columns = ["objective"] if spec.kind == "objective" else ["reward", "prioritization"]
    frame = _load(spec, value_columns)
    multiple_lambdas = frame["lambda"].nunique() > 1
    if spec.kind == "objective":
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        averaged = _seed_mean(frame, "objective")
        for (policy, lam), sub in averaged.groupby(["policy", "lambda"], sort=True):
            ax.plot(
                sub["t"],
                ema(sub["objective"].to_numpy(), spec.half_life),
                label=_series_label(policy, lam, multiple_lambdas),
            )
        ax.set_xlabel("t")
        ax.set_ylabel("objective")
        ax.set_title("objective (seed-averaged, smoothed)")
        ax.legend()
        fig.tight_layout()
        return fig, {"series": int(averaged.groupby(["policy", "lambda"]).ngroups)}

    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.5))
    for ax, column in zip(axes, ("reward", "prioritization")):
        averaged = _seed_mean(frame, column)
        for (policy, lam), sub in averaged.groupby(["policy", "lambda"], sort=True):
            ax.plot(
                sub["t"],
                ema(sub[column].to_numpy(), spec.half_life),
                label=_series_label(policy, lam, multiple_lambdas),
            )
        ax.set_xlabel("t")
        ax.set_ylabel(column)
        ax.set_title(column)
    axes[0].legend()
    fig.tight_layout()
    return fig, {"panels": 2}


def render(spec: ChartSpec) -> Path:
    """Build the chart and write the image; returns the output path.

    Nothing is written when the input is unusable.
    """
    fig, _ = build_chart(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
