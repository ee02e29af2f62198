#include "flowcast/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowcast/errors.hpp"

namespace flowcast {

double polyline_length(std::span<const Point> polyline) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        total += std::hypot(polyline[i + 1].x - polyline[i].x, polyline[i + 1].y - polyline[i].y);
    }
    return total;
}

double point_to_polyline_distance(const Point& point, std::span<const Point> polyline) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const Point& a = polyline[i];
        const Point& b = polyline[i + 1];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        const double len2 = dx * dx + dy * dy;
        double t = 0.0;
        if (len2 > 0.0) {
            t = ((point.x - a.x) * dx + (point.y - a.y) * dy) / len2;
            t = std::clamp(t, 0.0, 1.0);
        }
        best = std::min(best, std::hypot(point.x - (a.x + t * dx), point.y - (a.y + t * dy)));
    }
    return best;
}

void RoadNetwork::add_road(Road road) {
    if (road.id.empty()) throw InvalidParameterError("road id must be non-empty");
    if (road.polyline.size() < 2) {
        throw InvalidParameterError("road '" + road.id + "' needs a polyline of >= 2 points");
    }
    const double arc = polyline_length(road.polyline);
    if (road.length_m == 0.0) {
        road.length_m = arc;
    } else if (std::abs(road.length_m - arc) > 1e-6 * std::max(1.0, arc)) {
        throw InvalidParameterError("road '" + road.id + "' length_m disagrees with its polyline");
    }
    if (!roads_.emplace(road.id, std::move(road)).second) {
        throw InvalidParameterError("duplicate road id '" + road.id + "'");
    }
}

void RoadNetwork::add_turn(const std::string& from, const std::string& to, double fraction) {
    auto it = roads_.find(from);
    if (it == roads_.end()) throw ConfigError("turn references unknown road '" + from + "'");
    if (!contains(to)) throw ConfigError("turn references unknown road '" + to + "'");
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ConfigError("turn fraction must lie in [0, 1]");
    }
    double total = fraction;
    for (const Turn& t : it->second.successors) {
        if (t.to == to) throw ConfigError("duplicate turn " + from + " -> " + to);
        total += t.fraction;
    }
    if (total > 1.0 + 1e-9) {
        throw ConfigError("outbound fractions of road '" + from + "' exceed 1");
    }
    it->second.successors.push_back(Turn{to, fraction});
}

const Road& RoadNetwork::at(const std::string& id) const {
    auto it = roads_.find(id);
    if (it == roads_.end()) throw ConfigError("unknown road '" + id + "'");
    return it->second;
}

void write_network_file(const RoadNetwork& network, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    char buf[64];
    for (const auto& [id, road] : network.roads()) {
        out << "ROAD," << id;
        for (const Point& pt : road.polyline) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", pt.x, pt.y);
            out << buf;
        }
        out << '\n';
    }
    for (const auto& [id, road] : network.roads()) {
        for (const Turn& turn : road.successors) {
            std::snprintf(buf, sizeof(buf), "%.17g", turn.fraction);
            out << "TURN," << id << ',' << turn.to << ',' << buf << '\n';
        }
    }
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double_field(const std::string& text, const std::string& path, long line) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ParseError(path, line, "invalid number '" + text + "'");
    }
    return v;
}

}  // namespace

RoadNetwork read_network_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    RoadNetwork network;
    struct PendingTurn {
        std::string from, to;
        double fraction;
        long line;
    };
    std::vector<PendingTurn> turns;

    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields[0] == "ROAD") {
            if (fields.size() < 6 || fields.size() % 2 != 0) {
                throw ParseError(path, line_no, "ROAD needs an id and >= 2 coordinate pairs");
            }
            Road road;
            road.id = fields[1];
            for (std::size_t i = 2; i + 1 < fields.size(); i += 2) {
                road.polyline.push_back(Point{parse_double_field(fields[i], path, line_no),
                                              parse_double_field(fields[i + 1], path, line_no)});
            }
            try {
                network.add_road(std::move(road));
            } catch (const Error& e) {
                throw ParseError(path, line_no, e.what());
            }
        } else if (fields[0] == "TURN") {
            if (fields.size() != 4) throw ParseError(path, line_no, "TURN needs from,to,fraction");
            turns.push_back(PendingTurn{fields[1], fields[2],
                                        parse_double_field(fields[3], path, line_no), line_no});
        } else {
            throw ParseError(path, line_no, "unknown record kind '" + fields[0] + "'");
        }
    }
    for (const PendingTurn& t : turns) {
        try {
            network.add_turn(t.from, t.to, t.fraction);
        } catch (const Error& e) {
            throw ParseError(path, t.line, e.what());
        }
    }
    return network;
}

}  // namespace flowcast
