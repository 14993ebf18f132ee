"""Static charts over rankedcucb harness CSV output."""

from .charts import CHART_KINDS, ChartDataError, ChartSpec, build_chart, ema, render

__version__ = "0.1.0"

__all__ = ["CHART_KINDS", "ChartDataError", "ChartSpec", "build_chart", "ema", "render"]
