#include "flowcast/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "flowcast/errors.hpp"
#include "flowcast/rng.hpp"
#include "flowcast/time_format.hpp"

namespace flowcast {

namespace {

constexpr double kGridSpacingM = 500.0;
constexpr double kLaneOffsetM = 3.0;
constexpr double kExitFraction = 0.05;
// Routing consumes its own stream so enabling trajectory emission never
// perturbs the flow counts.
constexpr std::uint64_t kRouteSeedSalt = 0x8AE3F5C1D2B49E07ULL;
constexpr std::uint64_t kDemandSeedSalt = 0x5EEDD15EA5EDB10BULL;

std::string node_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return buf;
}

std::string road_name(int from, int to) { return "R" + node_name(from) + "-" + node_name(to); }

// Straight two-point polyline from a to b, shifted kLaneOffsetM to the right
// of the travel direction so opposite directions do not overlap.
std::vector<Point> offset_polyline(Point a, Point b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len = std::hypot(dx, dy);
    const double ox = kLaneOffsetM * dy / len;
    const double oy = kLaneOffsetM * -dx / len;
    return {Point{a.x + ox, a.y + oy}, Point{b.x + ox, b.y + oy}};
}

Point polyline_midpoint(std::span<const Point> polyline) {
    const double half = polyline_length(polyline) / 2.0;
    double walked = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const double seg =
            std::hypot(polyline[i + 1].x - polyline[i].x, polyline[i + 1].y - polyline[i].y);
        if (walked + seg >= half && seg > 0.0) {
            const double t = (half - walked) / seg;
            return Point{polyline[i].x + t * (polyline[i + 1].x - polyline[i].x),
                         polyline[i].y + t * (polyline[i + 1].y - polyline[i].y)};
        }
        walked += seg;
    }
    return polyline.back();
}

// Largest-remainder apportionment of `total` units over `weights` (which may
// sum to less than 1; the caller appends an explicit remainder bucket when
// the difference matters). Allocations sum to round(total * sum(weights))
// only when weights sum to 1, so callers pass a complete partition.
std::vector<long long> largest_remainder_split(long long total,
                                               std::span<const double> weights) {
    const std::size_t k = weights.size();
    std::vector<long long> alloc(k, 0);
    if (total <= 0 || k == 0) return alloc;
    std::vector<double> remainder(k);
    long long assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double quota = static_cast<double>(total) * weights[i];
        alloc[i] = static_cast<long long>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += alloc[i];
    }
    long long leftover = total - assigned;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; i < k && leftover > 0; ++i, --leftover) ++alloc[idx[i]];
    return alloc;
}

}  // namespace

double DemandProfile::expected_rate(int bin_of_day) const {
    double bump = 0.0;
    for (const DemandPeak& peak : peaks) {
        double delta = std::abs(static_cast<double>(bin_of_day) - peak.center_bin);
        delta = std::min(delta, static_cast<double>(kBinsPerDay) - delta);
        bump += peak.amplitude * std::exp(-(delta * delta) / (2.0 * peak.width_bins * peak.width_bins));
    }
    return base_rate * (1.0 + bump);
}

void DemandProfile::validate() const {
    if (base_rate < 0.0) throw InvalidParameterError("base_rate must be non-negative");
    if (noise_sd < 0.0) throw InvalidParameterError("noise_sd must be non-negative");
    for (const DemandPeak& peak : peaks) {
        if (peak.width_bins <= 0.0) throw InvalidParameterError("peak width must be positive");
    }
    for (int b = 0; b < kBinsPerDay; ++b) {
        if (expected_rate(b) < 0.0) {
            throw InvalidParameterError("expected demand rate is negative at bin " +
                                        std::to_string(b));
        }
    }
}

RoadNetwork generate_grid_network(int rows, int cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw InvalidParameterError("grid needs rows, cols >= 1");

    RoadNetwork network;
    auto node_index = [cols](int r, int c) { return r * cols + c; };
    auto node_point = [](int r, int c) {
        return Point{static_cast<double>(c) * kGridSpacingM, static_cast<double>(r) * kGridSpacingM};
    };

    struct Edge {
        int from, to;
    };
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({node_index(r, c), node_index(r, c + 1)});
            if (r + 1 < rows) edges.push_back({node_index(r, c), node_index(r + 1, c)});
        }
    }

    // node -> inbound/outbound road ids, rebuilt from the grid structure.
    std::map<int, std::vector<std::string>> inbound, outbound;
    auto add_directed = [&](int from, int to) {
        const int fr = from / cols, fc = from % cols;
        const int tr = to / cols, tc = to % cols;
        Road road;
        road.id = road_name(from, to);
        road.polyline = offset_polyline(node_point(fr, fc), node_point(tr, tc));
        network.add_road(std::move(road));
        outbound[from].push_back(road_name(from, to));
        inbound[to].push_back(road_name(from, to));
    };
    for (const Edge& e : edges) {
        add_directed(e.from, e.to);
        add_directed(e.to, e.from);
    }

    // Turn fractions per inbound road: Exp(1) draws normalized to 1 - exit
    // fraction (a symmetric Dirichlet over the outbound candidates). U-turns
    // are excluded unless they are the only way out. Node, inbound and
    // candidate orderings are all sorted, so the draw sequence is stable.
    Rng rng(seed);
    for (auto& [node, ins] : inbound) {
        std::sort(ins.begin(), ins.end());
        auto outs_it = outbound.find(node);
        if (outs_it == outbound.end()) continue;
        std::vector<std::string> outs = outs_it->second;
        std::sort(outs.begin(), outs.end());
        for (const std::string& in_id : ins) {
            // reverse of "R<from>-<to>" is "R<to>-<from>"
            const std::string reverse_id = "R" + in_id.substr(6, 4) + "-" + in_id.substr(1, 4);
            std::vector<std::string> candidates;
            for (const std::string& out_id : outs) {
                if (out_id != reverse_id) candidates.push_back(out_id);
            }
            if (candidates.empty()) candidates.push_back(reverse_id);
            std::vector<double> draws(candidates.size());
            double total = 0.0;
            for (double& d : draws) {
                d = rng.next_exponential();
                total += d;
            }
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                network.add_turn(in_id, candidates[i],
                                 (1.0 - kExitFraction) * draws[i] / total);
            }
        }
    }
    return network;
}

SimulationResult simulate_flows(const RoadNetwork& network,
                                const std::map<std::string, DemandProfile>& sources, int days,
                                std::uint64_t seed, bool emit_trajectories,
                                std::int64_t start_time) {
    if (days < 1) throw InvalidParameterError("days must be positive");
    for (const auto& [id, profile] : sources) {
        if (!network.contains(id)) throw ConfigError("unknown source road '" + id + "'");
        profile.validate();
    }

    // Stable road indexing (sorted by id).
    std::vector<std::string> ids;
    ids.reserve(network.size());
    for (const auto& [id, road] : network.roads()) ids.push_back(id);
    const std::size_t n_roads = ids.size();
    std::map<std::string, std::size_t> road_index;
    for (std::size_t i = 0; i < n_roads; ++i) road_index.emplace(ids[i], i);

    struct Outflow {
        std::vector<std::size_t> to;      // successor road indices
        std::vector<double> weights;      // turn fractions + final exit share
    };
    std::vector<Outflow> outflows(n_roads);
    for (std::size_t i = 0; i < n_roads; ++i) {
        const Road& road = network.at(ids[i]);
        double total = 0.0;
        for (const Turn& turn : road.successors) {
            outflows[i].to.push_back(road_index.at(turn.to));
            outflows[i].weights.push_back(turn.fraction);
            total += turn.fraction;
        }
        outflows[i].weights.push_back(std::max(0.0, 1.0 - total));  // exit bucket
    }

    std::vector<const DemandProfile*> demand(n_roads, nullptr);
    for (const auto& [id, profile] : sources) demand[road_index.at(id)] = &profile;

    const int bins = days * kBinsPerDay;
    std::vector<std::vector<double>> counts(n_roads,
                                            std::vector<double>(static_cast<std::size_t>(bins)));

    Rng noise_rng(seed);
    Rng route_rng(seed ^ kRouteSeedSalt);

    // Vehicle sets are maintained only when emitting; counts never depend on
    // them. spawn() hands out sequential ids.
    std::vector<std::vector<std::uint64_t>> occupants, arrivals;
    std::uint64_t next_vehicle = 0;
    SimulationResult result;
    if (emit_trajectories) {
        occupants.assign(n_roads, {});
        arrivals.assign(n_roads, {});
    }

    std::vector<long long> current(n_roads, 0), next(n_roads, 0);
    std::vector<Point> midpoints(n_roads);
    for (std::size_t i = 0; i < n_roads; ++i) {
        midpoints[i] = polyline_midpoint(network.at(ids[i]).polyline);
    }

    auto emit_bin = [&](int bin) {
        const std::int64_t stamp =
            start_time + static_cast<std::int64_t>(bin) * kFlowIntervalSeconds +
            kFlowIntervalSeconds / 2;
        for (std::size_t i = 0; i < n_roads; ++i) {
            for (std::uint64_t v : occupants[i]) {
                result.trajectories.push_back(TrajectoryRecord{
                    "v" + std::to_string(v), midpoints[i].x, midpoints[i].y, stamp});
            }
        }
    };

    for (int bin = 0; bin < bins; ++bin) {
        const int bin_of_day = bin % kBinsPerDay;
        if (bin == 0) {
            // Exogenous arrivals only.
            for (std::size_t i = 0; i < n_roads; ++i) {
                long long flow = 0;
                if (demand[i] != nullptr) {
                    flow = std::llround(demand[i]->expected_rate(bin_of_day));
                    if (demand[i]->noise_sd > 0.0) {
                        flow += std::llround(demand[i]->noise_sd * noise_rng.next_gaussian());
                    }
                    flow = std::max(0LL, flow);
                }
                current[i] = flow;
                counts[i][0] = static_cast<double>(flow);
                if (emit_trajectories) {
                    for (long long k = 0; k < flow; ++k) occupants[i].push_back(next_vehicle++);
                }
            }
            if (emit_trajectories) emit_bin(0);
            continue;
        }

        // Propagate bin-1 counts through the turn fractions.
        std::fill(next.begin(), next.end(), 0LL);
        std::vector<std::vector<long long>> splits(emit_trajectories ? n_roads : 0);
        for (std::size_t i = 0; i < n_roads; ++i) {
            if (current[i] <= 0) continue;
            const auto alloc = largest_remainder_split(current[i], outflows[i].weights);
            for (std::size_t k = 0; k < outflows[i].to.size(); ++k) {
                next[outflows[i].to[k]] += alloc[k];
            }
            if (emit_trajectories) splits[i] = alloc;
        }

        if (emit_trajectories) {
            for (auto& a : arrivals) a.clear();
            for (std::size_t i = 0; i < n_roads; ++i) {
                auto& vehicles = occupants[i];
                if (vehicles.empty()) continue;
                // Fisher-Yates with the routing stream, then consecutive
                // groups of the apportioned sizes head to each successor.
                for (std::size_t k = vehicles.size(); k > 1; --k) {
                    const std::size_t j =
                        static_cast<std::size_t>(route_rng.next_u64() % k);
                    std::swap(vehicles[k - 1], vehicles[j]);
                }
                std::size_t cursor = 0;
                for (std::size_t k = 0; k < outflows[i].to.size(); ++k) {
                    for (long long c = 0; c < splits[i][k]; ++c) {
                        arrivals[outflows[i].to[k]].push_back(vehicles[cursor++]);
                    }
                }
                // remaining vehicles exit the network
            }
        }

        for (std::size_t i = 0; i < n_roads; ++i) {
            long long flow = next[i];
            if (demand[i] != nullptr) {
                flow += std::llround(demand[i]->expected_rate(bin_of_day));
                if (demand[i]->noise_sd > 0.0) {
                    flow += std::llround(demand[i]->noise_sd * noise_rng.next_gaussian());
                }
            }
            flow = std::max(0LL, flow);
            counts[i][static_cast<std::size_t>(bin)] = static_cast<double>(flow);

            if (emit_trajectories) {
                auto& incoming = arrivals[i];
                const long long target = flow;
                const long long present = static_cast<long long>(incoming.size());
                if (target >= present) {
                    for (long long k = present; k < target; ++k) {
                        incoming.push_back(next_vehicle++);
                    }
                } else {
                    incoming.resize(static_cast<std::size_t>(target));
                }
                occupants[i] = incoming;
            }
            current[i] = flow;
        }
        if (emit_trajectories) emit_bin(bin);
    }

    result.flows.reserve(n_roads);
    for (std::size_t i = 0; i < n_roads; ++i) {
        result.flows.push_back(
            FlowSeries{ids[i], TimeSeries(std::move(counts[i]), start_time)});
    }
    return result;
}

ScenarioConfig read_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    ScenarioConfig config;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, line_no, "expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "rows") {
                config.rows = std::stoi(value);
            } else if (key == "cols") {
                config.cols = std::stoi(value);
            } else if (key == "days") {
                config.days = std::stoi(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "base_rate") {
                config.base_rate = std::stod(value);
            } else if (key == "demand_spread") {
                config.demand_spread = std::stod(value);
            } else if (key == "noise_sd") {
                config.noise_sd = std::stod(value);
            } else if (key == "start") {
                config.start_time = parse_rfc3339_utc(value);
            } else if (key == "peaks") {
                config.peaks.clear();
                if (!value.empty()) {
                    std::istringstream peaks_in(value);
                    std::string piece;
                    while (std::getline(peaks_in, piece, ';')) {
                        DemandPeak peak;
                        if (std::sscanf(piece.c_str(), "%lf:%lf:%lf", &peak.center_bin,
                                        &peak.width_bins, &peak.amplitude) != 3) {
                            throw ParseError(path, line_no,
                                             "peak must be center:width:amplitude");
                        }
                        config.peaks.push_back(peak);
                    }
                }
            } else {
                throw ParseError(path, line_no, "unknown scenario key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(path, line_no, "invalid value for '" + key + "'");
        }
    }
    return config;
}

std::map<std::string, DemandProfile> build_demand(const RoadNetwork& network,
                                                  const ScenarioConfig& scenario) {
    Rng rng(scenario.seed ^ kDemandSeedSalt);
    std::map<std::string, DemandProfile> demand;
    for (const auto& [id, road] : network.roads()) {
        DemandProfile profile;
        const double factor =
            1.0 + scenario.demand_spread * rng.next_uniform(-1.0, 1.0);
        profile.base_rate = scenario.base_rate * factor;
        profile.peaks = scenario.peaks;
        profile.noise_sd = scenario.noise_sd;
        profile.validate();
        demand.emplace(id, std::move(profile));
    }
    return demand;
}

}  // namespace flowcast
