"""Traffic-flow forecasting toolkit: ARIMA with BIC order selection, a
flow-conserving network simulator, and a rolling one-step evaluation harness.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from flowcast._core import (
    ArimaModel,
    ArimaOrder,
    ComparisonConfig,
    DemandPeak,
    EvalReport,
    EvalSummary,
    FitConfig,
    FlowSeries,
    FlowcastError,
    GridEntry,
    RoadComparison,
    RoadNetwork,
    ScenarioConfig,
    SelectionResult,
    TimeSeries,
    acf,
    bic,
    difference,
    fit,
    forecast,
    format_rfc3339_utc,
    generate_grid_network,
    grid_search,
    integrate,
    parse_rfc3339_utc,
    residuals,
    rmse,
    rolling_one_step,
    run_comparison,
    select_d,
    simulate_arima,
    simulate_scenario,
)

__all__ = [
    "ArimaModel",
    "ArimaOrder",
    "ComparisonConfig",
    "DemandPeak",
    "EvalReport",
    "EvalSummary",
    "FitConfig",
    "FlowSeries",
    "FlowcastError",
    "GridEntry",
    "RoadComparison",
    "RoadNetwork",
    "ScenarioConfig",
    "SelectionResult",
    "TimeSeries",
    "acf",
    "bic",
    "difference",
    "fit",
    "forecast",
    "format_rfc3339_utc",
    "generate_grid_network",
    "grid_search",
    "integrate",
    "parse_rfc3339_utc",
    "residuals",
    "rmse",
    "rolling_one_step",
    "run_comparison",
    "select_d",
    "simulate_arima",
    "simulate_scenario",
]
