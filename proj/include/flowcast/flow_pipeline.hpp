#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "flowcast/road_network.hpp"
#include "flowcast/time_series.hpp"

namespace flowcast {

/// One GPS-style observation of a vehicle.
struct TrajectoryRecord {
    std::string vehicle_id;
    double x = 0.0;
    double y = 0.0;
    std::int64_t timestamp = 0;
};

/// Vehicle counts per 15-minute bin on one road.
struct FlowSeries {
    std::string road_id;
    TimeSeries series;
};

/// Enforces the flow invariants: 900 s interval, non-negative integers.
void validate_flow_series(const FlowSeries& flow);

inline constexpr double kDefaultMatchDistanceM = 50.0;

/// Nearest road within max_dist_m of the record's position, smallest id on
/// exact distance ties; nullopt when everything is farther away.
std::optional<std::string> match_point(const RoadNetwork& network, const TrajectoryRecord& record,
                                       double max_dist_m = kDefaultMatchDistanceM);

struct AggregateDiagnostics {
    std::size_t total = 0;
    std::size_t matched = 0;
    std::size_t unmatched = 0;
    std::size_t out_of_window = 0;
};

/// Counts distinct vehicles per (road, bin) over [window.start, window.end).
/// Both window edges must be multiples of 900 s (AlignmentError otherwise).
/// Every road in the network receives a zero-filled series spanning the whole
/// window; the result is sorted by road id and independent of record order.
std::vector<FlowSeries> aggregate_flow(std::span<const TrajectoryRecord> records,
                                       const RoadNetwork& network, const TimeWindow& window,
                                       AggregateDiagnostics* diagnostics = nullptr,
                                       double max_dist_m = kDefaultMatchDistanceM);

enum class FillPolicy { zero, linear, carry_forward };

/// Replaces the masked bins according to the policy. linear interpolates
/// between the nearest non-missing neighbours (rounded to integers, endpoints
/// carried); carry_forward repeats the previous value, 0 before the first.
FlowSeries fill_missing(const FlowSeries& flow, const std::set<std::size_t>& missing,
                        FillPolicy policy);

/// Flow CSV: header `road_id,bin_start,count`, bin_start RFC 3339 UTC, rows
/// grouped by road with contiguous 900 s bins. read(write(x)) == x exactly.
void write_flow_csv(std::span<const FlowSeries> flows, const std::string& path);
std::vector<FlowSeries> read_flow_csv(const std::string& path);

/// Trajectory CSV: header `vehicle_id,x,y,timestamp`, timestamp RFC 3339 UTC.
void write_trajectory_csv(std::span<const TrajectoryRecord> records, const std::string& path);
std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path);

}  // namespace flowcast
