#include "flowcast/flow_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "flowcast/errors.hpp"
#include "flowcast/time_format.hpp"

namespace flowcast {

void validate_flow_series(const FlowSeries& flow) {
    if (flow.road_id.empty()) throw InvalidParameterError("flow series needs a road id");
    if (flow.series.interval_seconds() != kFlowIntervalSeconds) {
        throw InvalidParameterError("flow series for '" + flow.road_id + "' must use " +
                                    std::to_string(kFlowIntervalSeconds) + " s bins");
    }
    for (double v : flow.series.values()) {
        if (v < 0.0 || v != std::floor(v)) {
            throw InvalidParameterError("flow series for '" + flow.road_id +
                                        "' must hold non-negative integer counts");
        }
    }
}

std::optional<std::string> match_point(const RoadNetwork& network, const TrajectoryRecord& record,
                                       double max_dist_m) {
    if (network.size() == 0) throw InputError("match_point needs a non-empty network");
    const Point pt{record.x, record.y};
    const std::string* best_id = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [id, road] : network.roads()) {
        const double dist = point_to_polyline_distance(pt, road.polyline);
        if (dist < best_dist) {  // map order makes ties keep the smaller id
            best_dist = dist;
            best_id = &id;
        }
    }
    if (best_id == nullptr || best_dist > max_dist_m) return std::nullopt;
    return *best_id;
}

std::vector<FlowSeries> aggregate_flow(std::span<const TrajectoryRecord> records,
                                       const RoadNetwork& network, const TimeWindow& window,
                                       AggregateDiagnostics* diagnostics, double max_dist_m) {
    if (window.start % kFlowIntervalSeconds != 0 || window.end % kFlowIntervalSeconds != 0 ||
        window.end < window.start) {
        throw AlignmentError("aggregation window must be aligned to " +
                             std::to_string(kFlowIntervalSeconds) + " s boundaries");
    }
    const std::size_t n_bins = static_cast<std::size_t>((window.end - window.start) /
                                                        kFlowIntervalSeconds);

    std::map<std::string, std::vector<double>> counts;
    for (const auto& [id, road] : network.roads()) counts.emplace(id, std::vector<double>(n_bins));

    AggregateDiagnostics diag;
    diag.total = records.size();
    std::unordered_set<std::string> seen;  // "road\x1fbin\x1fvehicle" dedupe keys
    for (const TrajectoryRecord& rec : records) {
        if (rec.timestamp < window.start || rec.timestamp >= window.end) {
            ++diag.out_of_window;
            continue;
        }
        const auto road = match_point(network, rec, max_dist_m);
        if (!road) {
            ++diag.unmatched;
            continue;
        }
        ++diag.matched;
        const std::size_t bin =
            static_cast<std::size_t>((rec.timestamp - window.start) / kFlowIntervalSeconds);
        std::string key = *road;
        key += '\x1f';
        key += std::to_string(bin);
        key += '\x1f';
        key += rec.vehicle_id;
        if (seen.insert(std::move(key)).second) counts[*road][bin] += 1.0;
    }

    std::vector<FlowSeries> flows;
    flows.reserve(counts.size());
    for (auto& [id, values] : counts) {
        flows.push_back(FlowSeries{id, TimeSeries(std::move(values), window.start)});
    }
    if (diagnostics != nullptr) *diagnostics = diag;
    return flows;
}

FlowSeries fill_missing(const FlowSeries& flow, const std::set<std::size_t>& missing,
                        FillPolicy policy) {
    const std::size_t n = flow.series.size();
    for (std::size_t idx : missing) {
        if (idx >= n) {
            throw InputError("missing-bin index " + std::to_string(idx) + " out of range");
        }
    }
    std::vector<double> values = flow.series.values();

    switch (policy) {
        case FillPolicy::zero:
            for (std::size_t idx : missing) values[idx] = 0.0;
            break;
        case FillPolicy::carry_forward: {
            double last = 0.0;  // leading gaps fall back to zero
            for (std::size_t i = 0; i < n; ++i) {
                if (missing.count(i)) {
                    values[i] = last;
                } else {
                    last = values[i];
                }
            }
            break;
        }
        case FillPolicy::linear: {
            if (missing.size() == n) {
                throw DegenerateInputError("cannot interpolate a fully missing series");
            }
            // Known bins in ascending order bracket each gap.
            std::vector<std::size_t> known;
            for (std::size_t i = 0; i < n; ++i) {
                if (!missing.count(i)) known.push_back(i);
            }
            for (std::size_t idx : missing) {
                auto right = std::lower_bound(known.begin(), known.end(), idx);
                if (right == known.begin()) {
                    values[idx] = values[known.front()];  // carried left endpoint
                } else if (right == known.end()) {
                    values[idx] = values[known.back()];  // carried right endpoint
                } else {
                    const std::size_t hi = *right;
                    const std::size_t lo = *(right - 1);
                    const double t = static_cast<double>(idx - lo) / static_cast<double>(hi - lo);
                    values[idx] = static_cast<double>(
                        std::llround(values[lo] + t * (values[hi] - values[lo])));
                }
            }
            break;
        }
    }

    FlowSeries out{flow.road_id,
                   TimeSeries(std::move(values), flow.series.start_time(),
                              flow.series.interval_seconds())};
    validate_flow_series(out);
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

void write_flow_csv(std::span<const FlowSeries> flows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "road_id,bin_start,count\n";
    for (const FlowSeries& flow : flows) {
        validate_flow_series(flow);
        for (std::size_t i = 0; i < flow.series.size(); ++i) {
            out << flow.road_id << ',' << format_rfc3339_utc(flow.series.time_at(i)) << ','
                << static_cast<long long>(flow.series[i]) << '\n';
        }
    }
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

std::vector<FlowSeries> read_flow_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "road_id,bin_start,count") {
        throw ParseError(path, 1, "expected header 'road_id,bin_start,count'");
    }

    // Accumulate values per road, preserving first-appearance order, and
    // build the immutable series once at the end.
    struct Builder {
        std::int64_t start = 0;
        std::vector<double> values;
    };
    std::vector<std::string> order;
    std::map<std::string, Builder> builders;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3) throw ParseError(path, line_no, "expected 3 fields");

        std::int64_t bin_start = 0;
        if (!try_parse_rfc3339_utc(fields[1], bin_start)) {
            throw ParseError(path, line_no, "invalid bin_start '" + fields[1] + "'");
        }
        char* end = nullptr;
        const long long count = std::strtoll(fields[2].c_str(), &end, 10);
        if (fields[2].empty() || end != fields[2].c_str() + fields[2].size()) {
            throw ParseError(path, line_no, "invalid count '" + fields[2] + "'");
        }
        if (count < 0) throw ParseError(path, line_no, "negative count");

        auto [it, inserted] = builders.emplace(fields[0], Builder{bin_start, {}});
        if (inserted) order.push_back(fields[0]);
        Builder& b = it->second;
        const std::int64_t expected =
            b.start + static_cast<std::int64_t>(b.values.size()) * kFlowIntervalSeconds;
        if (!b.values.empty() && bin_start != expected) {
            throw ParseError(path, line_no, "non-contiguous bin for road '" + fields[0] + "'");
        }
        b.values.push_back(static_cast<double>(count));
    }

    std::vector<FlowSeries> flows;
    flows.reserve(order.size());
    for (const std::string& id : order) {
        Builder& b = builders.at(id);
        flows.push_back(FlowSeries{id, TimeSeries(std::move(b.values), b.start)});
    }
    return flows;
}

void write_trajectory_csv(std::span<const TrajectoryRecord> records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "vehicle_id,x,y,timestamp\n";
    char buf[64];
    for (const TrajectoryRecord& rec : records) {
        out << rec.vehicle_id;
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,", rec.x, rec.y);
        out << buf << format_rfc3339_utc(rec.timestamp) << '\n';
    }
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "vehicle_id,x,y,timestamp") {
        throw ParseError(path, 1, "expected header 'vehicle_id,x,y,timestamp'");
    }

    std::vector<TrajectoryRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4) throw ParseError(path, line_no, "expected 4 fields");

        TrajectoryRecord rec;
        rec.vehicle_id = fields[0];
        char* end = nullptr;
        rec.x = std::strtod(fields[1].c_str(), &end);
        if (fields[1].empty() || end != fields[1].c_str() + fields[1].size() ||
            !std::isfinite(rec.x)) {
            throw ParseError(path, line_no, "invalid x '" + fields[1] + "'");
        }
        rec.y = std::strtod(fields[2].c_str(), &end);
        if (fields[2].empty() || end != fields[2].c_str() + fields[2].size() ||
            !std::isfinite(rec.y)) {
            throw ParseError(path, line_no, "invalid y '" + fields[2] + "'");
        }
        if (!try_parse_rfc3339_utc(fields[3], rec.timestamp)) {
            throw ParseError(path, line_no, "invalid timestamp '" + fields[3] + "'");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace flowcast
