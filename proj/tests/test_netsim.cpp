#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "flowcast/errors.hpp"
#include "flowcast/netsim.hpp"
#include "test_support.hpp"

using namespace flowcast;

namespace {

RoadNetwork chain_network() {
    RoadNetwork network;
    Road a;
    a.id = "A";
    a.polyline = {{0, 0}, {500, 0}};
    network.add_road(a);
    Road b;
    b.id = "B";
    b.polyline = {{500, 0}, {1000, 0}};
    network.add_road(b);
    network.add_turn("A", "B", 1.0);
    return network;
}

RoadNetwork fork_network() {
    RoadNetwork network;
    Road a;
    a.id = "A";
    a.polyline = {{0, 0}, {500, 0}};
    network.add_road(a);
    Road b;
    b.id = "B";
    b.polyline = {{500, 0}, {1000, 200}};
    network.add_road(b);
    Road c;
    c.id = "C";
    c.polyline = {{500, 0}, {1000, -200}};
    network.add_road(c);
    network.add_turn("A", "B", 0.6);
    network.add_turn("A", "C", 0.4);
    return network;
}

DemandProfile constant_demand(double rate) {
    DemandProfile profile;
    profile.base_rate = rate;
    return profile;
}

const FlowSeries& flow_of(const SimulationResult& sim, const std::string& id) {
    for (const FlowSeries& f : sim.flows) {
        if (f.road_id == id) return f;
    }
    throw std::runtime_error("road not found: " + id);
}

}  // namespace

TEST_CASE("grid road counts follow the edge formula") {
    CHECK(generate_grid_network(1, 1, 0).size() == 0);
    CHECK(generate_grid_network(1, 2, 0).size() == 2);
    CHECK(generate_grid_network(3, 3, 0).size() == 24);   // 2*(3*2 + 2*3)
    CHECK(generate_grid_network(16, 16, 0).size() == 960);
    CHECK_THROWS_AS(generate_grid_network(0, 3, 0), InvalidParameterError);
}

TEST_CASE("grid generation is deterministic per seed") {
    const RoadNetwork a = generate_grid_network(3, 3, 42);
    const RoadNetwork b = generate_grid_network(3, 3, 42);
    const RoadNetwork c = generate_grid_network(3, 3, 43);

    REQUIRE(a.size() == b.size());
    bool any_fraction_differs = false;
    for (const auto& [id, road] : a.roads()) {
        const Road& other = b.at(id);
        REQUIRE(road.successors.size() == other.successors.size());
        for (std::size_t i = 0; i < road.successors.size(); ++i) {
            CHECK(road.successors[i].to == other.successors[i].to);
            CHECK(road.successors[i].fraction == other.successors[i].fraction);
        }
        for (std::size_t i = 0; i < road.successors.size(); ++i) {
            if (road.successors[i].fraction != c.at(id).successors[i].fraction) {
                any_fraction_differs = true;
            }
        }
    }
    CHECK(any_fraction_differs);
}

TEST_CASE("grid turn fractions sum to one minus the exit share") {
    const RoadNetwork network = generate_grid_network(4, 4, 7);
    for (const auto& [id, road] : network.roads()) {
        double total = 0.0;
        for (const Turn& turn : road.successors) {
            CHECK(turn.fraction >= 0.0);
            total += turn.fraction;
        }
        CHECK(near(total, 0.95, 1e-12));
    }
}

TEST_CASE("two-direction roads are geometrically distinct") {
    const RoadNetwork network = generate_grid_network(2, 2, 1);
    const Road& forward = network.at("R0000-0001");
    const Road& backward = network.at("R0001-0000");
    CHECK(point_to_polyline_distance(forward.polyline[0], backward.polyline) > 1.0);
    CHECK(forward.length_m == doctest::Approx(500.0));
}

TEST_CASE("chain propagates with a one-bin delay") {
    const auto sim = simulate_flows(chain_network(), {{"A", constant_demand(10.0)}}, 1, 5);
    const auto& a = flow_of(sim, "A").series;
    const auto& b = flow_of(sim, "B").series;
    REQUIRE(a.size() == 96);
    CHECK(b[0] == 0.0);  // exogenous only at t = 0
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t] == 10.0);
    for (std::size_t t = 1; t < b.size(); ++t) CHECK(b[t] == 10.0);
}

TEST_CASE("fork splits 10 into exactly 6 and 4") {
    const auto sim = simulate_flows(fork_network(), {{"A", constant_demand(10.0)}}, 2, 11);
    const auto& a = flow_of(sim, "A").series;
    const auto& b = flow_of(sim, "B").series;
    const auto& c = flow_of(sim, "C").series;
    for (std::size_t t = 1; t < b.size(); ++t) {
        CHECK(b[t] == 6.0);
        CHECK(c[t] == 4.0);
        // conservation: the full inbound count reappears downstream
        CHECK(b[t] + c[t] == a[t - 1]);
    }
}

TEST_CASE("apportionment conserves counts for uneven rates") {
    // 7 vehicles over 0.6/0.4 cannot round per-branch; the split must still
    // sum to 7 with no exit share configured.
    const auto sim = simulate_flows(fork_network(), {{"A", constant_demand(7.0)}}, 1, 3);
    const auto& a = flow_of(sim, "A").series;
    const auto& b = flow_of(sim, "B").series;
    const auto& c = flow_of(sim, "C").series;
    for (std::size_t t = 1; t < b.size(); ++t) {
        CHECK(b[t] + c[t] == a[t - 1]);
    }
}

TEST_CASE("flows are deterministic, non-negative integers") {
    const RoadNetwork network = generate_grid_network(3, 3, 9);
    ScenarioConfig scenario;
    scenario.rows = scenario.cols = 3;
    scenario.days = 1;
    scenario.seed = 9;
    const auto demand = build_demand(network, scenario);

    const auto a = simulate_flows(network, demand, 1, 9);
    const auto b = simulate_flows(network, demand, 1, 9);
    REQUIRE(a.flows.size() == b.flows.size());
    for (std::size_t i = 0; i < a.flows.size(); ++i) {
        CHECK(a.flows[i].series.values() == b.flows[i].series.values());
        validate_flow_series(a.flows[i]);
    }
}

TEST_CASE("trajectory emission does not perturb the counts") {
    const RoadNetwork network = generate_grid_network(2, 3, 21);
    ScenarioConfig scenario;
    scenario.rows = 2;
    scenario.cols = 3;
    scenario.days = 1;
    scenario.seed = 21;
    const auto demand = build_demand(network, scenario);

    const auto plain = simulate_flows(network, demand, 1, 21, false);
    const auto emitted = simulate_flows(network, demand, 1, 21, true);
    REQUIRE(plain.flows.size() == emitted.flows.size());
    for (std::size_t i = 0; i < plain.flows.size(); ++i) {
        CHECK(plain.flows[i].series.values() == emitted.flows[i].series.values());
    }
    CHECK(!emitted.trajectories.empty());
    CHECK(plain.trajectories.empty());
}

TEST_CASE("emitted trajectories aggregate back to the internal counts") {
    for (std::uint64_t seed : {1ULL, 42ULL}) {
        const RoadNetwork network = generate_grid_network(3, 3, seed);
        ScenarioConfig scenario;
        scenario.rows = scenario.cols = 3;
        scenario.days = 2;
        scenario.seed = seed;
        scenario.base_rate = 4.0;  // keep the vehicle population small
        const auto demand = build_demand(network, scenario);

        const auto sim = simulate_flows(network, demand, 2, seed, true);
        const TimeWindow window{kDefaultScenarioStart,
                                kDefaultScenarioStart + 2 * kBinsPerDay * 900};
        AggregateDiagnostics diag;
        const auto aggregated = aggregate_flow(sim.trajectories, network, window, &diag);

        CHECK(diag.unmatched == 0);
        CHECK(diag.out_of_window == 0);
        REQUIRE(aggregated.size() == sim.flows.size());
        for (std::size_t i = 0; i < aggregated.size(); ++i) {
            CHECK(aggregated[i].road_id == sim.flows[i].road_id);
            CHECK(aggregated[i].series.values() == sim.flows[i].series.values());
        }
    }
}

TEST_CASE("unknown source road is a configuration error") {
    CHECK_THROWS_AS(simulate_flows(chain_network(), {{"Z", constant_demand(1.0)}}, 1, 0),
                    ConfigError);
}

TEST_CASE("demand profile shape and validation") {
    DemandProfile profile;
    profile.base_rate = 10.0;
    profile.peaks = {{34.0, 6.0, 1.5}};
    CHECK(profile.expected_rate(34) == doctest::Approx(25.0));
    CHECK(profile.expected_rate(82) < 11.0);  // far from the peak
    // wraparound: bin 2 is 4 bins from a peak centred at 94
    DemandProfile wrap;
    wrap.base_rate = 10.0;
    wrap.peaks = {{94.0, 4.0, 1.0}};
    CHECK(near(wrap.expected_rate(2), wrap.expected_rate(90), 1e-12));

    DemandProfile negative;
    negative.base_rate = 10.0;
    negative.peaks = {{10.0, 3.0, -2.0}};
    CHECK_THROWS_AS(negative.validate(), InvalidParameterError);
}

TEST_CASE("scenario files round trip through the parser") {
    const auto path = std::filesystem::temp_directory_path() / "flowcast_test_scenario.txt";
    {
        std::ofstream out(path);
        out << "# synthetic month\n";
        out << "rows=4\ncols=5\ndays=7\nseed=123\n";
        out << "base_rate=6.5\ndemand_spread=0.2\nnoise_sd=1.25\n";
        out << "start=2015-03-01T00:00:00Z\n";
        out << "peaks=30:5:1.2;68:7:0.9\n";
    }
    const ScenarioConfig scenario = read_scenario_file(path.string());
    CHECK(scenario.rows == 4);
    CHECK(scenario.cols == 5);
    CHECK(scenario.days == 7);
    CHECK(scenario.seed == 123);
    CHECK(scenario.base_rate == 6.5);
    CHECK(scenario.demand_spread == 0.2);
    CHECK(scenario.noise_sd == 1.25);
    CHECK(scenario.start_time == kDefaultScenarioStart);
    REQUIRE(scenario.peaks.size() == 2);
    CHECK(scenario.peaks[1].center_bin == 68.0);

    {
        std::ofstream out(path);
        out << "bogus=1\n";
    }
    CHECK_THROWS_AS(read_scenario_file(path.string()), ParseError);
    std::filesystem::remove(path);
}
