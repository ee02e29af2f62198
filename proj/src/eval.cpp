#include "flowcast/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flowcast/errors.hpp"
#include "flowcast/selection.hpp"
#include "flowcast/time_format.hpp"

namespace flowcast {

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty() || actual.size() != predicted.size()) {
        throw InputError("rmse needs equal, non-zero lengths (got " +
                         std::to_string(actual.size()) + " and " +
                         std::to_string(predicted.size()) + ")");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double diff = actual[i] - predicted[i];
        ss += diff * diff;
    }
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

namespace {

// Index range of `window` inside `series`; both edges must fall on the bin
// grid and inside the observed span.
std::pair<std::size_t, std::size_t> window_indices(const TimeSeries& series,
                                                   const TimeWindow& window,
                                                   const std::string& road_id) {
    const std::int64_t step = series.interval_seconds();
    if (window.end <= window.start) throw AlignmentError("empty window for road " + road_id);
    const std::int64_t off_start = window.start - series.start_time();
    const std::int64_t off_end = window.end - series.start_time();
    if (off_start % step != 0 || off_end % step != 0) {
        throw AlignmentError("window does not fall on bin boundaries for road " + road_id);
    }
    if (off_start < 0 ||
        off_end > static_cast<std::int64_t>(series.size()) * step) {
        throw AlignmentError("road " + road_id + " does not cover the requested window");
    }
    return {static_cast<std::size_t>(off_start / step), static_cast<std::size_t>(off_end / step)};
}

struct RoadTask {
    RoadComparison comparison;
    std::vector<double> actual;
    std::vector<double> normal_pred;
    std::vector<double> optimized_pred;
};

RoadTask compare_road(const FlowSeries& flow, const TimeWindow& train_window,
                      const TimeWindow& test_window, const ComparisonConfig& config) {
    RoadTask task;
    const auto [train_lo, train_hi] = window_indices(flow.series, train_window, flow.road_id);
    const auto [test_lo, test_hi] = window_indices(flow.series, test_window, flow.road_id);
    const TimeSeries train = flow.series.slice(train_lo, train_hi - train_lo);
    const TimeSeries test = flow.series.slice(test_lo, test_hi - test_lo);
    task.actual = test.values();

    std::string failure;
    try {
        const ArimaModel normal = fit(train, config.baseline, config.fit);
        task.normal_pred = rolling_one_step(normal, train, test);
        task.comparison.normal_rmse = rmse(task.actual, task.normal_pred);
    } catch (const Error& e) {
        failure = "baseline: " + std::string(e.what());
    }
    try {
        const int d = config.d ? *config.d : select_d(train, config.max_d);
        const SelectionResult selection =
            grid_search(train, config.p_max, config.q_max, d, config.fit);
        task.comparison.chosen_order = selection.chosen;
        task.optimized_pred = rolling_one_step(selection.chosen_model, train, test);
        task.comparison.optimized_rmse = rmse(task.actual, task.optimized_pred);
    } catch (const Error& e) {
        if (!failure.empty()) failure += "; ";
        failure += "selection: " + std::string(e.what());
    }
    if (!failure.empty()) {
        task.comparison.failed = true;
        task.comparison.failure = failure;
    }
    return task;
}

}  // namespace

EvalReport run_comparison(std::span<const FlowSeries> flows, const TimeWindow& train_window,
                          const TimeWindow& test_window, const ComparisonConfig& config) {
    if (flows.empty()) throw InputError("run_comparison needs at least one road");
    if (test_window.start != train_window.end || test_window.end <= test_window.start) {
        throw AlignmentError("test window must immediately follow the train window");
    }

    std::vector<RoadTask> tasks(flows.size());
    std::vector<std::string> first_error(flows.size());

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t jobs =
        std::min<std::size_t>(config.jobs > 0 ? static_cast<std::size_t>(config.jobs) : hw,
                              flows.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= flows.size()) break;
            try {
                tasks[i] = compare_road(flows[i], train_window, test_window, config);
            } catch (const Error& e) {
                // setup problems (bad windows, bad series) abort the run
                first_error[i] = e.what();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
        if (!first_error[i].empty()) {
            throw AlignmentError("road " + flows[i].road_id + ": " + first_error[i]);
        }
    }

    EvalReport report;
    const std::size_t test_bins = tasks.front().actual.size();
    std::vector<double> sum_actual(test_bins), sum_normal(test_bins), sum_optimized(test_bins);

    double total_normal = 0.0, total_optimized = 0.0;
    std::size_t improved = 0, ok_count = 0;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const RoadTask& task = tasks[i];
        report.per_road.emplace(flows[i].road_id, task.comparison);
        if (task.comparison.failed) continue;
        ++ok_count;
        total_normal += task.comparison.normal_rmse;
        total_optimized += task.comparison.optimized_rmse;
        if (task.comparison.optimized_rmse < task.comparison.normal_rmse) ++improved;
        for (std::size_t b = 0; b < test_bins; ++b) {
            sum_actual[b] += task.actual[b];
            sum_normal[b] += task.normal_pred[b];
            sum_optimized[b] += task.optimized_pred[b];
        }
    }
    if (ok_count == 0) {
        throw SelectionFailedError("all " + std::to_string(flows.size()) +
                                   " roads failed to fit");
    }

    for (std::size_t b = 0; b < test_bins; ++b) {
        sum_actual[b] /= static_cast<double>(ok_count);
        sum_normal[b] /= static_cast<double>(ok_count);
        sum_optimized[b] /= static_cast<double>(ok_count);
    }
    const std::int64_t interval = flows.front().series.interval_seconds();
    report.fleet_avg_actual = TimeSeries(std::move(sum_actual), test_window.start, interval);
    report.fleet_avg_normal = TimeSeries(std::move(sum_normal), test_window.start, interval);
    report.fleet_avg_optimized =
        TimeSeries(std::move(sum_optimized), test_window.start, interval);

    report.summary.n_roads = flows.size();
    report.summary.n_failed = flows.size() - ok_count;
    report.summary.mean_normal_rmse = total_normal / static_cast<double>(ok_count);
    report.summary.mean_optimized_rmse = total_optimized / static_cast<double>(ok_count);
    report.summary.fraction_improved =
        static_cast<double>(improved) / static_cast<double>(ok_count);
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void emit_report(const EvalReport& report, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());
    const std::filesystem::path base(out_dir);

    nlohmann::ordered_json summary;
    summary["mean_normal_rmse"] = report.summary.mean_normal_rmse;
    summary["mean_optimized_rmse"] = report.summary.mean_optimized_rmse;
    summary["fraction_improved"] = report.summary.fraction_improved;
    summary["n_roads"] = report.summary.n_roads;
    summary["n_failed"] = report.summary.n_failed;
    write_text_file((base / "summary.json").string(), summary.dump(2) + "\n");

    std::string per_road = "road_id,chosen_p,chosen_d,chosen_q,normal_rmse,optimized_rmse\n";
    for (const auto& [id, cmp] : report.per_road) {
        per_road += id;
        if (cmp.failed) {
            per_road += ",,,,,\n";
            continue;
        }
        per_road += ',' + std::to_string(cmp.chosen_order.p);
        per_road += ',' + std::to_string(cmp.chosen_order.d);
        per_road += ',' + std::to_string(cmp.chosen_order.q);
        per_road += ',' + format_double(cmp.normal_rmse);
        per_road += ',' + format_double(cmp.optimized_rmse);
        per_road += '\n';
    }
    write_text_file((base / "per_road.csv").string(), per_road);

    std::string curves = "bin_start,actual_avg,normal_avg,optimized_avg\n";
    for (std::size_t b = 0; b < report.fleet_avg_actual.size(); ++b) {
        curves += format_rfc3339_utc(report.fleet_avg_actual.time_at(b));
        curves += ',' + format_double(report.fleet_avg_actual[b]);
        curves += ',' + format_double(report.fleet_avg_normal[b]);
        curves += ',' + format_double(report.fleet_avg_optimized[b]);
        curves += '\n';
    }
    write_text_file((base / "fleet_curves.csv").string(), curves);
}

}  // namespace flowcast
