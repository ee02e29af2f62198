#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowcast/arima.hpp"
#include "flowcast/errors.hpp"
#include "flowcast/eval.hpp"
#include "flowcast/flow_pipeline.hpp"
#include "flowcast/netsim.hpp"
#include "flowcast/road_network.hpp"
#include "flowcast/selection.hpp"
#include "flowcast/time_format.hpp"
#include "flowcast/time_series.hpp"

namespace {

using nlohmann::ordered_json;

/// Bad flag values detected after CLI11 parsing; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

flowcast::ArimaOrder parse_order(const std::string& text) {
    flowcast::ArimaOrder order;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d,%d,%d%c", &order.p, &order.d, &order.q, &extra) != 3) {
        throw UsageError("--order/--baseline must be 'p,d,q', got '" + text + "'");
    }
    try {
        flowcast::validate_order(order);
    } catch (const flowcast::Error& e) {
        throw UsageError(e.what());
    }
    return order;
}

flowcast::TimeWindow parse_window(const std::string& text) {
    const auto sep = text.find("..");
    flowcast::TimeWindow window;
    if (sep == std::string::npos ||
        !flowcast::try_parse_rfc3339_utc(text.substr(0, sep), window.start) ||
        !flowcast::try_parse_rfc3339_utc(text.substr(sep + 2), window.end)) {
        throw UsageError("--window must be 'START..END' in RFC 3339 UTC, got '" + text + "'");
    }
    return window;
}

std::optional<int> parse_d_flag(const std::string& text) {
    if (text == "auto") return std::nullopt;
    if (text == "0" || text == "1" || text == "2") return text[0] - '0';
    throw UsageError("--d must be auto, 0, 1 or 2, got '" + text + "'");
}

flowcast::FlowSeries load_road_flow(const std::string& path, const std::string& road_id) {
    for (auto& flow : flowcast::read_flow_csv(path)) {
        if (flow.road_id == road_id) return std::move(flow);
    }
    throw flowcast::InputError("road '" + road_id + "' not found in " + path);
}

ordered_json order_json(const flowcast::ArimaOrder& order) {
    return ordered_json{{"p", order.p}, {"d", order.d}, {"q", order.q}};
}

ordered_json model_json(const flowcast::ArimaModel& model) {
    ordered_json j;
    j["order"] = order_json(model.order);
    j["intercept"] = model.intercept;
    j["ar"] = model.ar_coeffs;
    j["ma"] = model.ma_coeffs;
    j["sigma2"] = model.sigma2;
    j["log_likelihood"] = model.log_likelihood;
    j["n_effective"] = model.n_effective;
    return j;
}

struct SimulateArgs {
    std::string scenario_file;
    std::optional<int> rows, cols, days;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool emit_trajectories = false;
};

int run_simulate(const SimulateArgs& args) {
    flowcast::ScenarioConfig scenario;
    if (!args.scenario_file.empty()) scenario = flowcast::read_scenario_file(args.scenario_file);
    if (args.rows) scenario.rows = *args.rows;
    if (args.cols) scenario.cols = *args.cols;
    if (args.days) scenario.days = *args.days;
    if (args.seed) scenario.seed = *args.seed;

    const flowcast::RoadNetwork network =
        flowcast::generate_grid_network(scenario.rows, scenario.cols, scenario.seed);
    const auto demand = flowcast::build_demand(network, scenario);
    const flowcast::SimulationResult sim =
        flowcast::simulate_flows(network, demand, scenario.days, scenario.seed,
                                 args.emit_trajectories, scenario.start_time);

    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    if (ec) {
        throw flowcast::IoError("cannot create directory '" + args.out_dir +
                                "': " + ec.message());
    }
    const std::filesystem::path base(args.out_dir);
    flowcast::write_network_file(network, (base / "network.txt").string());
    flowcast::write_flow_csv(sim.flows, (base / "flows.csv").string());
    if (args.emit_trajectories) {
        flowcast::write_trajectory_csv(sim.trajectories, (base / "trajectories.csv").string());
    }

    ordered_json info;
    info["roads"] = network.size();
    info["days"] = scenario.days;
    info["bins"] = scenario.days * flowcast::kBinsPerDay;
    info["seed"] = scenario.seed;
    info["out"] = args.out_dir;
    if (args.emit_trajectories) info["trajectory_records"] = sim.trajectories.size();
    std::cout << info.dump(2) << '\n';
    return 0;
}

int run_aggregate(const std::string& network_path, const std::string& trajectories_path,
                  const std::string& window_text, const std::string& out_path) {
    const flowcast::RoadNetwork network = flowcast::read_network_file(network_path);
    const auto records = flowcast::read_trajectory_csv(trajectories_path);
    const flowcast::TimeWindow window = parse_window(window_text);

    flowcast::AggregateDiagnostics diag;
    const auto flows = flowcast::aggregate_flow(records, network, window, &diag);
    flowcast::write_flow_csv(flows, out_path);

    ordered_json info;
    info["total_records"] = diag.total;
    info["matched"] = diag.matched;
    info["unmatched"] = diag.unmatched;
    info["out_of_window"] = diag.out_of_window;
    info["roads"] = flows.size();
    info["out"] = out_path;
    std::cout << info.dump(2) << '\n';
    return 0;
}

int run_fit(const std::string& flows_path, const std::string& road_id,
            const std::string& order_text, std::uint64_t seed) {
    const flowcast::FlowSeries flow = load_road_flow(flows_path, road_id);
    flowcast::FitConfig config;
    config.seed = seed;
    const flowcast::ArimaModel model = flowcast::fit(flow.series, parse_order(order_text), config);

    ordered_json j;
    j["road"] = road_id;
    j.update(model_json(model));
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_select(const std::string& flows_path, const std::string& road_id, int p_max, int q_max,
               const std::string& d_text, std::uint64_t seed) {
    const flowcast::FlowSeries flow = load_road_flow(flows_path, road_id);
    const std::optional<int> fixed_d = parse_d_flag(d_text);
    const int d = fixed_d ? *fixed_d : flowcast::select_d(flow.series, 2);

    flowcast::FitConfig config;
    config.seed = seed;
    const flowcast::SelectionResult result =
        flowcast::grid_search(flow.series, p_max, q_max, d, config);

    ordered_json j;
    j["road"] = road_id;
    j["chosen"] = order_json(result.chosen);
    j["n"] = result.n;
    j["k_rule"] = result.k_rule;
    j["model"] = model_json(result.chosen_model);
    ordered_json table = ordered_json::array();
    for (const auto& entry : result.table) {
        ordered_json row;
        row["p"] = entry.order.p;
        row["d"] = entry.order.d;
        row["q"] = entry.order.q;
        if (entry.bic) {
            row["bic"] = *entry.bic;
        } else {
            row["failure"] = entry.failure;
        }
        table.push_back(std::move(row));
    }
    j["table"] = std::move(table);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_forecast(const std::string& flows_path, const std::string& road_id, int horizon,
                 const std::string& order_text, bool auto_select, std::uint64_t seed) {
    if (horizon < 1) throw UsageError("--horizon must be positive");
    if (auto_select != order_text.empty()) {
        throw UsageError("exactly one of --order and --auto is required");
    }
    const flowcast::FlowSeries flow = load_road_flow(flows_path, road_id);

    flowcast::FitConfig config;
    config.seed = seed;
    flowcast::ArimaModel model;
    if (auto_select) {
        const int d = flowcast::select_d(flow.series, 2);
        model = flowcast::grid_search(flow.series, 5, 5, d, config).chosen_model;
    } else {
        model = flowcast::fit(flow.series, parse_order(order_text), config);
    }
    const auto values = flowcast::forecast(model, flow.series, horizon);

    ordered_json j;
    j["road"] = road_id;
    j["order"] = order_json(model.order);
    j["horizon"] = horizon;
    j["values"] = values;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int run_evaluate(const std::string& flows_path, const std::string& test_day,
                 const std::string& baseline_text, int p_max, int q_max,
                 const std::string& d_text, const std::string& out_dir, int jobs,
                 std::uint64_t seed) {
    std::int64_t day_start = 0;
    if (!flowcast::try_parse_date_utc(test_day, day_start)) {
        throw UsageError("--test-day must be YYYY-MM-DD, got '" + test_day + "'");
    }
    const auto flows = flowcast::read_flow_csv(flows_path);
    if (flows.empty()) throw flowcast::InputError("no flow series in " + flows_path);

    flowcast::ComparisonConfig config;
    config.baseline = parse_order(baseline_text);
    config.p_max = p_max;
    config.q_max = q_max;
    config.d = parse_d_flag(d_text);
    config.jobs = jobs;
    config.fit.seed = seed;

    const flowcast::TimeWindow train{flows.front().series.start_time(), day_start};
    const flowcast::TimeWindow test{day_start, day_start + 86400};
    const flowcast::EvalReport report = flowcast::run_comparison(flows, train, test, config);
    flowcast::emit_report(report, out_dir);

    ordered_json j;
    j["mean_normal_rmse"] = report.summary.mean_normal_rmse;
    j["mean_optimized_rmse"] = report.summary.mean_optimized_rmse;
    j["fraction_improved"] = report.summary.fraction_improved;
    j["n_roads"] = report.summary.n_roads;
    j["n_failed"] = report.summary.n_failed;
    j["out"] = out_dir;
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-road traffic-flow forecasting with BIC-optimized ARIMA"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    int opt_rows = 0, opt_cols = 0, opt_days = 0;
    std::uint64_t opt_seed = 0;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic road network and flows");
    auto* rows_opt = simulate->add_option("--rows", opt_rows, "Grid rows")->check(CLI::PositiveNumber);
    auto* cols_opt = simulate->add_option("--cols", opt_cols, "Grid columns")->check(CLI::PositiveNumber);
    auto* days_opt = simulate->add_option("--days", opt_days, "Days to simulate")->check(CLI::PositiveNumber);
    auto* seed_opt = simulate->add_option("--seed", opt_seed, "Simulation seed");
    simulate->add_option("--scenario", sim_args.scenario_file, "Scenario key=value file")
        ;
    simulate->add_option("--out", sim_args.out_dir, "Output directory")->required();
    simulate->add_flag("--emit-trajectories", sim_args.emit_trajectories,
                       "Also write per-vehicle trajectory records");

    std::string agg_network, agg_trajectories, agg_window, agg_out;
    auto* aggregate = app.add_subcommand("aggregate", "Count trajectories into per-road flows");
    aggregate->add_option("--network", agg_network, "Network file")->required();
    aggregate->add_option("--trajectories", agg_trajectories, "Trajectory CSV")->required();
    aggregate->add_option("--window", agg_window, "START..END (RFC 3339 UTC)")->required();
    aggregate->add_option("--out", agg_out, "Output flow CSV")->required();

    std::string fit_flows, fit_road, fit_order;
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit one ARIMA order to one road");
    fit_cmd->add_option("--flows", fit_flows, "Flow CSV")->required();
    fit_cmd->add_option("--road", fit_road, "Road id")->required();
    fit_cmd->add_option("--order", fit_order, "p,d,q")->required();
    fit_cmd->add_option("--seed", fit_seed, "Optimizer restart seed");

    std::string sel_flows, sel_road, sel_d = "auto";
    int sel_pmax = 5, sel_qmax = 5;
    std::uint64_t sel_seed = 0;
    auto* select = app.add_subcommand("select", "BIC grid search over (p, q) for one road");
    select->add_option("--flows", sel_flows, "Flow CSV")->required();
    select->add_option("--road", sel_road, "Road id")->required();
    select->add_option("--pmax", sel_pmax, "Largest AR order")->check(CLI::NonNegativeNumber);
    select->add_option("--qmax", sel_qmax, "Largest MA order")->check(CLI::NonNegativeNumber);
    select->add_option("--d", sel_d, "auto, 0, 1 or 2");
    select->add_option("--seed", sel_seed, "Optimizer restart seed");

    std::string fc_flows, fc_road, fc_order;
    int fc_horizon = 0;
    bool fc_auto = false;
    std::uint64_t fc_seed = 0;
    auto* forecast_cmd = app.add_subcommand("forecast", "Predict future bins for one road");
    forecast_cmd->add_option("--flows", fc_flows, "Flow CSV")->required();
    forecast_cmd->add_option("--road", fc_road, "Road id")->required();
    forecast_cmd->add_option("--horizon", fc_horizon, "Bins to predict")->required()
        ->check(CLI::PositiveNumber);
    forecast_cmd->add_option("--order", fc_order, "p,d,q (fixed order)");
    forecast_cmd->add_flag("--auto", fc_auto, "Pick the order by BIC grid search");
    forecast_cmd->add_option("--seed", fc_seed, "Optimizer restart seed");

    std::string ev_flows, ev_day, ev_baseline = "1,1,1", ev_d = "auto", ev_out;
    int ev_pmax = 5, ev_qmax = 5, ev_jobs = 0;
    std::uint64_t ev_seed = 0;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Compare fixed-order and BIC-optimized ARIMA over a held-out day");
    evaluate->add_option("--flows", ev_flows, "Flow CSV")->required();
    evaluate->add_option("--test-day", ev_day, "Held-out day, YYYY-MM-DD")->required();
    evaluate->add_option("--baseline", ev_baseline, "Baseline order p,d,q");
    evaluate->add_option("--pmax", ev_pmax, "Largest AR order")->check(CLI::NonNegativeNumber);
    evaluate->add_option("--qmax", ev_qmax, "Largest MA order")->check(CLI::NonNegativeNumber);
    evaluate->add_option("--d", ev_d, "auto, 0, 1 or 2 for the optimized side");
    evaluate->add_option("--out", ev_out, "Report directory")->required();
    evaluate->add_option("--jobs", ev_jobs, "Worker threads (default: available cores)")
        ->check(CLI::NonNegativeNumber);
    evaluate->add_option("--seed", ev_seed, "Optimizer restart seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "flowcast: usage-error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (simulate->parsed()) {
            if (*rows_opt) sim_args.rows = opt_rows;
            if (*cols_opt) sim_args.cols = opt_cols;
            if (*days_opt) sim_args.days = opt_days;
            if (*seed_opt) sim_args.seed = opt_seed;
            return run_simulate(sim_args);
        }
        if (aggregate->parsed()) {
            return run_aggregate(agg_network, agg_trajectories, agg_window, agg_out);
        }
        if (fit_cmd->parsed()) return run_fit(fit_flows, fit_road, fit_order, fit_seed);
        if (select->parsed()) {
            return run_select(sel_flows, sel_road, sel_pmax, sel_qmax, sel_d, sel_seed);
        }
        if (forecast_cmd->parsed()) {
            return run_forecast(fc_flows, fc_road, fc_horizon, fc_order, fc_auto, fc_seed);
        }
        if (evaluate->parsed()) {
            return run_evaluate(ev_flows, ev_day, ev_baseline, ev_pmax, ev_qmax, ev_d, ev_out,
                                ev_jobs, ev_seed);
        }
        std::cerr << "flowcast: usage-error: no subcommand\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "flowcast: usage-error: " << e.what() << '\n';
        return 1;
    } catch (const flowcast::Error& e) {
        const char* kind = e.kind() == flowcast::ErrorKind::data ? "data-error" : "compute-error";
        std::cerr << "flowcast: " << kind << ": " << e.what() << '\n';
        return e.kind() == flowcast::ErrorKind::data ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "flowcast: compute-error: " << e.what() << '\n';
        return 3;
    }
}
