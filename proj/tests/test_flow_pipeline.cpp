#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "flowcast/errors.hpp"
#include "flowcast/flow_pipeline.hpp"
#include "flowcast/rng.hpp"
#include "flowcast/time_format.hpp"

using namespace flowcast;

namespace {

RoadNetwork two_parallel_roads() {
    RoadNetwork network;
    Road a;
    a.id = "a";
    a.polyline = {{0, 10}, {100, 10}};
    network.add_road(a);
    Road b;
    b.id = "b";
    b.polyline = {{0, -10}, {100, -10}};
    network.add_road(b);
    return network;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("match_point picks the nearest road within the threshold") {
    const RoadNetwork network = two_parallel_roads();

    CHECK(match_point(network, {"v", 50.0, 10.0, 0}) == "a");      // exactly on a
    CHECK(match_point(network, {"v", 50.0, -6.0, 0}) == "b");      // nearer to b
    CHECK(!match_point(network, {"v", 50.0, 2000.0, 0}));          // beyond 50 m
    CHECK(match_point(network, {"v", 50.0, 0.0, 0}) == "a");       // 10 m tie -> smaller id

    const RoadNetwork empty;
    CHECK_THROWS_AS(match_point(empty, {"v", 0, 0, 0}), InputError);
}

TEST_CASE("aggregate_flow dedupes per vehicle, road and bin") {
    const RoadNetwork network = two_parallel_roads();
    const TimeWindow window{0, 1800};

    std::vector<TrajectoryRecord> records{
        {"car1", 10, 10, 100},  // three pings, same bin, same road
        {"car1", 20, 10, 200},
        {"car1", 30, 10, 800},
        {"car2", 40, 10, 500},     // second vehicle, same bin
        {"car1", 50, 10, 1000},    // second bin
        {"car9", 50, -10, 1000},   // road b
        {"ghost", 50, 500, 100},   // unmatched
        {"late", 10, 10, 5000},    // outside the window
    };
    AggregateDiagnostics diag;
    const auto flows = aggregate_flow(records, network, window, &diag);

    REQUIRE(flows.size() == 2);
    CHECK(flows[0].road_id == "a");
    CHECK(flows[0].series.values() == std::vector<double>{2, 1});
    CHECK(flows[1].road_id == "b");
    CHECK(flows[1].series.values() == std::vector<double>{0, 1});

    CHECK(diag.total == 8);
    CHECK(diag.matched == 6);
    CHECK(diag.unmatched == 1);
    CHECK(diag.out_of_window == 1);
    CHECK(diag.matched + diag.unmatched + diag.out_of_window == diag.total);

    CHECK_THROWS_AS(aggregate_flow(records, network, TimeWindow{10, 910}, nullptr),
                    AlignmentError);
}

TEST_CASE("aggregate_flow is order independent") {
    const RoadNetwork network = two_parallel_roads();
    const TimeWindow window{0, 3600};

    Rng rng(91);
    std::vector<TrajectoryRecord> records;
    for (int i = 0; i < 200; ++i) {
        records.push_back(TrajectoryRecord{
            "v" + std::to_string(static_cast<int>(rng.next_u64() % 40)),
            rng.next_uniform(0.0, 100.0),
            rng.next_uniform(-15.0, 15.0),
            static_cast<std::int64_t>(rng.next_u64() % 3600)});
    }
    const auto base = aggregate_flow(records, network, window);

    std::vector<TrajectoryRecord> shuffled = records;
    for (std::size_t k = shuffled.size(); k > 1; --k) {
        std::swap(shuffled[k - 1], shuffled[static_cast<std::size_t>(rng.next_u64() % k)]);
    }
    const auto again = aggregate_flow(shuffled, network, window);

    REQUIRE(base.size() == again.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].road_id == again[i].road_id);
        CHECK(base[i].series.values() == again[i].series.values());
    }
}

TEST_CASE("fill_missing policies") {
    const FlowSeries flow{"r", TimeSeries({4, 0, 6}, 0)};
    CHECK(fill_missing(flow, {1}, FillPolicy::linear).series.values() ==
          std::vector<double>{4, 5, 6});
    CHECK(fill_missing(flow, {1}, FillPolicy::zero).series.values() ==
          std::vector<double>{4, 0, 6});
    const FlowSeries leading{"r", TimeSeries({0, 0, 3}, 0)};
    CHECK(fill_missing(leading, {0, 1}, FillPolicy::carry_forward).series.values() ==
          std::vector<double>{0, 0, 3});
    CHECK(fill_missing(leading, {0, 1}, FillPolicy::linear).series.values() ==
          std::vector<double>{3, 3, 3});  // endpoints carried

    const FlowSeries tail{"r", TimeSeries({7, 1, 1}, 0)};
    CHECK(fill_missing(tail, {1, 2}, FillPolicy::carry_forward).series.values() ==
          std::vector<double>{7, 7, 7});

    CHECK_THROWS_AS(fill_missing(flow, {0, 1, 2}, FillPolicy::linear), DegenerateInputError);
    CHECK_THROWS_AS(fill_missing(flow, {9}, FillPolicy::zero), InputError);
}

TEST_CASE("fill_missing always yields non-negative integers") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> values(24);
        for (double& v : values) v = static_cast<double>(rng.next_u64() % 50);
        std::set<std::size_t> mask;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (rng.next_unit() < 0.4) mask.insert(i);
        }
        if (mask.size() == values.size()) mask.erase(0);
        const FlowSeries flow{"r", TimeSeries(values, 0)};
        for (FillPolicy policy :
             {FillPolicy::zero, FillPolicy::linear, FillPolicy::carry_forward}) {
            const FlowSeries filled = fill_missing(flow, mask, policy);
            for (double v : filled.series.values()) {
                CHECK(v >= 0.0);
                CHECK(v == std::floor(v));
            }
        }
    }
}

TEST_CASE("flow csv round trip is exact") {
    const auto path = temp_file("flowcast_test_flows.csv");
    std::vector<double> day(96);
    for (std::size_t i = 0; i < day.size(); ++i) day[i] = static_cast<double>(i % 17);
    const std::vector<FlowSeries> flows{
        FlowSeries{"r1", TimeSeries(day, 1425168000)},
        FlowSeries{"r2", TimeSeries({1, 2, 3}, 1425168000)},
    };
    write_flow_csv(flows, path.string());
    const auto back = read_flow_csv(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].road_id == "r1");
    CHECK(back[0].series.values() == flows[0].series.values());
    CHECK(back[0].series.start_time() == 1425168000);
    CHECK(back[1].series.values() == flows[1].series.values());
    std::filesystem::remove(path);
}

TEST_CASE("flow csv parse errors carry line numbers") {
    const auto path = temp_file("flowcast_test_bad_flows.csv");
    {
        std::ofstream out(path);
        out << "road_id,bin_start,count\n";
        out << "r1,2015-03-01T00:00:00Z,5\n";
        out << "r1,2015-03-01T00:15:00Z,-2\n";
    }
    try {
        read_flow_csv(path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    {
        std::ofstream out(path);
        out << "road_id,bin_start,count\n";
    }
    CHECK(read_flow_csv(path.string()).empty());

    {
        std::ofstream out(path);
        out << "road_id,bin_start,count\n";
        out << "r1,not-a-time,5\n";
    }
    CHECK_THROWS_AS(read_flow_csv(path.string()), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("trajectory csv round trip is exact") {
    const auto path = temp_file("flowcast_test_traj.csv");
    const std::vector<TrajectoryRecord> records{
        {"veh-1", 12.5, -3.75, 1425168450},
        {"veh-2", 0.1234567890123456, 99999.0, 1425169350},
    };
    write_trajectory_csv(records, path.string());
    const auto back = read_trajectory_csv(path.string());
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].vehicle_id == records[i].vehicle_id);
        CHECK(back[i].x == records[i].x);
        CHECK(back[i].y == records[i].y);
        CHECK(back[i].timestamp == records[i].timestamp);
    }
    std::filesystem::remove(path);
}

TEST_CASE("network file round trip is exact") {
    const auto path = temp_file("flowcast_test_network.txt");
    RoadNetwork network = two_parallel_roads();
    network.add_turn("a", "b", 0.25);
    network.add_turn("a", "a", 0.5);
    write_network_file(network, path.string());
    const RoadNetwork back = read_network_file(path.string());

    REQUIRE(back.size() == 2);
    const Road& a = back.at("a");
    CHECK(a.polyline.size() == 2);
    CHECK(a.polyline[1].x == 100.0);
    CHECK(a.length_m == network.at("a").length_m);
    REQUIRE(a.successors.size() == 2);
    CHECK(a.successors[0].to == "b");
    CHECK(a.successors[0].fraction == 0.25);
    std::filesystem::remove(path);
}

TEST_CASE("network invariants are enforced") {
    RoadNetwork network;
    Road bad;
    bad.id = "x";
    bad.polyline = {{0, 0}};
    CHECK_THROWS_AS(network.add_road(bad), InvalidParameterError);

    Road stated;
    stated.id = "x";
    stated.polyline = {{0, 0}, {100, 0}};
    stated.length_m = 123.0;  // disagrees with the 100 m geometry
    CHECK_THROWS_AS(network.add_road(stated), InvalidParameterError);

    RoadNetwork ok = two_parallel_roads();
    CHECK_THROWS_AS(ok.add_turn("a", "zzz", 0.1), ConfigError);
    ok.add_turn("a", "b", 0.9);
    CHECK_THROWS_AS(ok.add_turn("a", "a", 0.2), ConfigError);  // sum would exceed 1
}

TEST_CASE("validate_flow_series rejects bad counts") {
    CHECK_THROWS_AS(validate_flow_series({"r", TimeSeries({1.5}, 0)}), InvalidParameterError);
    CHECK_THROWS_AS(validate_flow_series({"r", TimeSeries({-1.0}, 0)}), InvalidParameterError);
    CHECK_THROWS_AS(validate_flow_series({"r", TimeSeries({1.0}, 0, 600)}),
                    InvalidParameterError);
    CHECK_NOTHROW(validate_flow_series({"r", TimeSeries({0, 4, 2}, 0)}));
}

TEST_CASE("rfc3339 helpers") {
    CHECK(format_rfc3339_utc(1425168000) == "2015-03-01T00:00:00Z");
    CHECK(parse_rfc3339_utc("2015-03-01T00:00:00Z") == 1425168000);
    CHECK(parse_rfc3339_utc("2015-03-15T08:30:45Z") ==
          1425168000 + 14 * 86400 + 8 * 3600 + 30 * 60 + 45);
    std::int64_t out = 0;
    CHECK(!try_parse_rfc3339_utc("2015-03-01 00:00:00Z", out));
    CHECK(!try_parse_rfc3339_utc("2015-02-30T00:00:00Z", out));
    CHECK(!try_parse_rfc3339_utc("2015-03-01T24:00:00Z", out));
    CHECK(try_parse_date_utc("2015-03-31", out));
    CHECK(out == 1425168000 + 30 * 86400);

    // round trip across a leap year boundary
    const std::int64_t leap = parse_rfc3339_utc("2016-02-29T23:59:59Z");
    CHECK(format_rfc3339_utc(leap) == "2016-02-29T23:59:59Z");
}
