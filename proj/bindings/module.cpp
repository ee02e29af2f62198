#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flowcast/arima.hpp"
#include "flowcast/errors.hpp"
#include "flowcast/eval.hpp"
#include "flowcast/netsim.hpp"
#include "flowcast/selection.hpp"
#include "flowcast/time_format.hpp"
#include "flowcast/time_series.hpp"

namespace py = pybind11;
using namespace flowcast;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& array) {
    return {array.data(), array.data() + array.size()};
}

py::array_t<double> to_array(const std::vector<double>& values) {
    py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Traffic-flow forecasting core: time series, ARIMA, BIC selection, simulation";

    py::register_exception<Error>(m, "FlowcastError", PyExc_RuntimeError);

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>&
                             values,
                         std::int64_t start_time, std::int64_t interval_seconds) {
                 return TimeSeries(to_vector(values), start_time, interval_seconds);
             }),
             py::arg("values"), py::arg("start_time") = 0,
             py::arg("interval_seconds") = kFlowIntervalSeconds)
        .def_property_readonly("values",
                               [](const TimeSeries& self) { return to_array(self.values()); })
        .def_property_readonly("start_time", &TimeSeries::start_time)
        .def_property_readonly("interval_seconds", &TimeSeries::interval_seconds)
        .def("__len__", &TimeSeries::size)
        .def("slice", &TimeSeries::slice, py::arg("offset"), py::arg("count"))
        .def("__repr__", [](const TimeSeries& self) {
            return "TimeSeries(n=" + std::to_string(self.size()) +
                   ", start=" + format_rfc3339_utc(self.start_time()) + ")";
        });

    m.def("difference", &difference, py::arg("series"), py::arg("d"));
    m.def(
        "integrate",
        [](const TimeSeries& diffed,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& seeds, int d) {
            const auto seed_values = to_vector(seeds);
            return integrate(diffed, seed_values, d);
        },
        py::arg("diffed"), py::arg("seed_values"), py::arg("d"));
    m.def("acf", &acf, py::arg("series"), py::arg("max_lag"));
    m.def("select_d", &select_d, py::arg("series"), py::arg("max_d") = 2);

    py::class_<ArimaOrder>(m, "ArimaOrder")
        .def(py::init<int, int, int>(), py::arg("p") = 0, py::arg("d") = 0, py::arg("q") = 0)
        .def_readwrite("p", &ArimaOrder::p)
        .def_readwrite("d", &ArimaOrder::d)
        .def_readwrite("q", &ArimaOrder::q)
        .def("__eq__", [](const ArimaOrder& a, const ArimaOrder& b) { return a == b; })
        .def("__repr__", [](const ArimaOrder& o) {
            return "ArimaOrder(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," +
                   std::to_string(o.q) + ")";
        });

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("max_optimizer_iterations", &FitConfig::max_optimizer_iterations)
        .def_readwrite("convergence_tolerance", &FitConfig::convergence_tolerance)
        .def_readwrite("stationarity_penalty", &FitConfig::stationarity_penalty)
        .def_readwrite("seed", &FitConfig::seed)
        .def_readwrite("restarts", &FitConfig::restarts);

    py::class_<ArimaModel>(m, "ArimaModel")
        .def(py::init<>())
        .def_readwrite("order", &ArimaModel::order)
        .def_readwrite("intercept", &ArimaModel::intercept)
        .def_readwrite("ar_coeffs", &ArimaModel::ar_coeffs)
        .def_readwrite("ma_coeffs", &ArimaModel::ma_coeffs)
        .def_readwrite("sigma2", &ArimaModel::sigma2)
        .def_readwrite("log_likelihood", &ArimaModel::log_likelihood)
        .def_readwrite("n_effective", &ArimaModel::n_effective)
        .def("__repr__", [](const ArimaModel& model) {
            return "ArimaModel(order=(" + std::to_string(model.order.p) + "," +
                   std::to_string(model.order.d) + "," + std::to_string(model.order.q) +
                   "), loglik=" + std::to_string(model.log_likelihood) + ")";
        });

    m.def("fit", &fit, py::arg("series"), py::arg("order"), py::arg("config") = FitConfig{});
    m.def("residuals", &residuals, py::arg("model"), py::arg("series"));
    m.def(
        "forecast",
        [](const ArimaModel& model, const TimeSeries& history, int horizon) {
            return to_array(forecast(model, history, horizon));
        },
        py::arg("model"), py::arg("history"), py::arg("horizon"));
    m.def(
        "rolling_one_step",
        [](const ArimaModel& model, const TimeSeries& train, const TimeSeries& test) {
            return to_array(rolling_one_step(model, train, test));
        },
        py::arg("model"), py::arg("train"), py::arg("test"));
    m.def(
        "simulate_arima",
        [](const ArimaOrder& order, double intercept, const std::vector<double>& ar,
           const std::vector<double>& ma, double sigma2, std::size_t n, std::uint64_t seed,
           std::int64_t start_time) {
            return simulate_arima(order, ArimaParams{intercept, ar, ma, sigma2}, n, seed,
                                  start_time);
        },
        py::arg("order"), py::arg("intercept"), py::arg("ar"), py::arg("ma"), py::arg("sigma2"),
        py::arg("n"), py::arg("seed"), py::arg("start_time") = 0);

    m.def("bic", &bic, py::arg("log_likelihood"), py::arg("k"), py::arg("n"));

    py::class_<GridEntry>(m, "GridEntry")
        .def_readonly("order", &GridEntry::order)
        .def_readonly("bic", &GridEntry::bic)
        .def_readonly("failure", &GridEntry::failure);

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("chosen", &SelectionResult::chosen)
        .def_readonly("chosen_model", &SelectionResult::chosen_model)
        .def_readonly("table", &SelectionResult::table)
        .def_readonly("n", &SelectionResult::n)
        .def_readonly("k_rule", &SelectionResult::k_rule);

    m.def("grid_search", &grid_search, py::arg("series"), py::arg("p_max"), py::arg("q_max"),
          py::arg("d"), py::arg("config") = FitConfig{});

    m.def(
        "rmse",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& actual,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& predicted) {
            return rmse(to_vector(actual), to_vector(predicted));
        },
        py::arg("actual"), py::arg("predicted"));

    py::class_<FlowSeries>(m, "FlowSeries")
        .def_readonly("road_id", &FlowSeries::road_id)
        .def_readonly("series", &FlowSeries::series);

    py::class_<RoadNetwork>(m, "RoadNetwork")
        .def("__len__", &RoadNetwork::size)
        .def("road_ids", [](const RoadNetwork& self) {
            std::vector<std::string> ids;
            for (const auto& [id, road] : self.roads()) ids.push_back(id);
            return ids;
        });

    py::class_<DemandPeak>(m, "DemandPeak")
        .def(py::init<double, double, double>(), py::arg("center_bin"), py::arg("width_bins"),
             py::arg("amplitude"));

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("rows", &ScenarioConfig::rows)
        .def_readwrite("cols", &ScenarioConfig::cols)
        .def_readwrite("days", &ScenarioConfig::days)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_readwrite("base_rate", &ScenarioConfig::base_rate)
        .def_readwrite("demand_spread", &ScenarioConfig::demand_spread)
        .def_readwrite("noise_sd", &ScenarioConfig::noise_sd)
        .def_readwrite("peaks", &ScenarioConfig::peaks)
        .def_readwrite("start_time", &ScenarioConfig::start_time);

    m.def("generate_grid_network", &generate_grid_network, py::arg("rows"), py::arg("cols"),
          py::arg("seed"));
    m.def(
        "simulate_scenario",
        [](const ScenarioConfig& scenario) {
            const RoadNetwork network =
                generate_grid_network(scenario.rows, scenario.cols, scenario.seed);
            const auto demand = build_demand(network, scenario);
            return simulate_flows(network, demand, scenario.days, scenario.seed, false,
                                  scenario.start_time)
                .flows;
        },
        py::arg("scenario"),
        "Generate the scenario's grid network and return its simulated flow series.");

    py::class_<EvalSummary>(m, "EvalSummary")
        .def_readonly("mean_normal_rmse", &EvalSummary::mean_normal_rmse)
        .def_readonly("mean_optimized_rmse", &EvalSummary::mean_optimized_rmse)
        .def_readonly("fraction_improved", &EvalSummary::fraction_improved)
        .def_readonly("n_roads", &EvalSummary::n_roads)
        .def_readonly("n_failed", &EvalSummary::n_failed);

    py::class_<RoadComparison>(m, "RoadComparison")
        .def_readonly("chosen_order", &RoadComparison::chosen_order)
        .def_readonly("normal_rmse", &RoadComparison::normal_rmse)
        .def_readonly("optimized_rmse", &RoadComparison::optimized_rmse)
        .def_readonly("failed", &RoadComparison::failed);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("per_road", &EvalReport::per_road)
        .def_readonly("fleet_avg_actual", &EvalReport::fleet_avg_actual)
        .def_readonly("fleet_avg_normal", &EvalReport::fleet_avg_normal)
        .def_readonly("fleet_avg_optimized", &EvalReport::fleet_avg_optimized)
        .def_readonly("summary", &EvalReport::summary);

    py::class_<ComparisonConfig>(m, "ComparisonConfig")
        .def(py::init<>())
        .def_readwrite("baseline", &ComparisonConfig::baseline)
        .def_readwrite("p_max", &ComparisonConfig::p_max)
        .def_readwrite("q_max", &ComparisonConfig::q_max)
        .def_readwrite("d", &ComparisonConfig::d)
        .def_readwrite("max_d", &ComparisonConfig::max_d)
        .def_readwrite("fit", &ComparisonConfig::fit)
        .def_readwrite("jobs", &ComparisonConfig::jobs);

    m.def(
        "run_comparison",
        [](const std::vector<FlowSeries>& flows, std::int64_t train_start,
           std::int64_t train_end, std::int64_t test_end, const ComparisonConfig& config) {
            return run_comparison(flows, TimeWindow{train_start, train_end},
                                  TimeWindow{train_end, test_end}, config);
        },
        py::arg("flows"), py::arg("train_start"), py::arg("train_end"), py::arg("test_end"),
        py::arg("config") = ComparisonConfig{},
        py::call_guard<py::gil_scoped_release>());

    m.def("parse_rfc3339_utc", [](const std::string& s) { return parse_rfc3339_utc(s); });
    m.def("format_rfc3339_utc", &format_rfc3339_utc);
}
