#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowcast/flow_pipeline.hpp"
#include "flowcast/road_network.hpp"

namespace flowcast {

inline constexpr int kBinsPerDay = 96;
/// 2015-03-01T00:00:00Z, the first day of the simulated month.
inline constexpr std::int64_t kDefaultScenarioStart = 1425168000;

struct DemandPeak {
    double center_bin = 0.0;  ///< bin-of-day of the peak
    double width_bins = 1.0;
    double amplitude = 0.0;  ///< multiplier on base_rate at the center
};

/// Daily demand shape for a source road: a base rate plus Gaussian-shaped
/// rush-hour bumps, with optional per-bin Gaussian count noise.
struct DemandProfile {
    double base_rate = 0.0;
    std::vector<DemandPeak> peaks;
    double noise_sd = 0.0;

    /// base_rate * (1 + sum of peak bumps) at the given bin of day, using
    /// circular distance so shapes wrap across midnight.
    double expected_rate(int bin_of_day) const;
    /// Throws InvalidParameterError if any bin's expected rate is negative.
    void validate() const;
};

/// Directed grid: every undirected edge between adjacent intersections
/// becomes two one-way roads, 500 m apart on the grid and offset 3 m to the
/// right of travel so the two directions are geometrically distinct. Turn
/// fractions per inbound road are Dirichlet-style draws normalized to
/// 1 - 0.05 (the rest exits the network). Deterministic per seed.
RoadNetwork generate_grid_network(int rows, int cols, std::uint64_t seed);

struct SimulationResult {
    std::vector<FlowSeries> flows;                ///< sorted by road id
    std::vector<TrajectoryRecord> trajectories;   ///< empty unless emission enabled
};

/// Discrete-time flow propagation on 900 s bins with a one-bin delay per
/// road: inbound counts are split by turn fraction with largest-remainder
/// rounding (splits sum to the inbound count exactly), then exogenous
/// arrivals and rounded Gaussian noise are added and the total clamped at 0.
/// With emission enabled, individual vehicles realize the same counts and
/// one record per (vehicle, road, bin) is emitted at the road midpoint, so
/// aggregate_flow over the records reproduces the internal counts exactly.
SimulationResult simulate_flows(const RoadNetwork& network,
                                const std::map<std::string, DemandProfile>& sources, int days,
                                std::uint64_t seed, bool emit_trajectories = false,
                                std::int64_t start_time = kDefaultScenarioStart);

/// Everything needed to reproduce a simulated month of traffic.
struct ScenarioConfig {
    int rows = 16;
    int cols = 16;
    int days = 31;
    std::uint64_t seed = 42;
    double base_rate = 10.0;
    double demand_spread = 0.4;  ///< per-road base-rate factor in [1-s, 1+s]
    double noise_sd = 1.5;
    std::vector<DemandPeak> peaks{{34.0, 6.0, 1.6}, {70.0, 6.0, 1.4}};
    std::int64_t start_time = kDefaultScenarioStart;
};

/// Flat key=value file: rows, cols, days, seed, base_rate, demand_spread,
/// noise_sd, start (RFC 3339), peaks (center:width:amplitude;...).
/// Unknown keys are rejected.
ScenarioConfig read_scenario_file(const std::string& path);

/// Per-road demand profiles for the scenario: every road is a source with a
/// seeded base-rate factor, shared peaks and shared noise level.
std::map<std::string, DemandProfile> build_demand(const RoadNetwork& network,
                                                  const ScenarioConfig& scenario);

}  // namespace flowcast
