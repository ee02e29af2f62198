#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "flowcast/arima.hpp"
#include "flowcast/flow_pipeline.hpp"

namespace flowcast {

/// Root-mean-square error between two equal-length sequences.
double rmse(std::span<const double> actual, std::span<const double> predicted);

struct RoadComparison {
    ArimaOrder chosen_order;  ///< grid-search winner (meaningful unless failed)
    double normal_rmse = 0.0;
    double optimized_rmse = 0.0;
    bool failed = false;
    std::string failure;
};

struct EvalSummary {
    double mean_normal_rmse = 0.0;
    double mean_optimized_rmse = 0.0;
    double fraction_improved = 0.0;  ///< share of non-failed roads where optimized wins strictly
    std::size_t n_roads = 0;
    std::size_t n_failed = 0;
};

/// Per-road and fleet-level comparison of a fixed-order baseline against the
/// BIC-selected model. Fleet curves are per-bin means over non-failed roads.
struct EvalReport {
    std::map<std::string, RoadComparison> per_road;
    TimeSeries fleet_avg_actual;
    TimeSeries fleet_avg_normal;
    TimeSeries fleet_avg_optimized;
    EvalSummary summary;
};

struct ComparisonConfig {
    ArimaOrder baseline{1, 1, 1};
    int p_max = 5;
    int q_max = 5;
    std::optional<int> d;  ///< fixed differencing order; nullopt selects per road
    int max_d = 2;         ///< cap for the per-road selection
    FitConfig fit;
    int jobs = 0;  ///< worker threads; 0 means hardware concurrency
};

/// For every road: fit the baseline and the grid search on the train window,
/// produce rolling one-step predictions over the test window for both, and
/// compare RMSEs. A road where either side fails is marked failed and
/// excluded from the averages. Output is identical for any jobs count.
EvalReport run_comparison(std::span<const FlowSeries> flows, const TimeWindow& train_window,
                          const TimeWindow& test_window, const ComparisonConfig& config = {});

/// Writes summary.json, per_road.csv and fleet_curves.csv into out_dir,
/// byte-deterministically.
void emit_report(const EvalReport& report, const std::string& out_dir);

}  // namespace flowcast
