#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace flowcast {

/// Planar projected coordinates in meters.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Turn {
    std::string to;
    double fraction = 0.0;
};

/// One directed road segment; a two-way street is two Road entries.
struct Road {
    std::string id;
    std::vector<Point> polyline;  ///< at least two points
    double length_m = 0.0;
    std::vector<Turn> successors;  ///< fractions sum to at most 1; remainder exits
};

double polyline_length(std::span<const Point> polyline);

/// Distance from a point to the nearest location on a polyline (segment
/// interiors and endpoints both count).
double point_to_polyline_distance(const Point& point, std::span<const Point> polyline);

/// Directed graph of road segments keyed by id (and therefore iterated in
/// lexicographic order, which the matching tie-break relies on).
class RoadNetwork {
public:
    /// Computes length_m from the polyline when it is left at zero.
    /// Throws InvalidParameterError on duplicate ids, short polylines, or a
    /// stored length inconsistent with the geometry.
    void add_road(Road road);

    /// Throws ConfigError when either road is unknown or the outbound
    /// fractions of `from` would leave [0, 1].
    void add_turn(const std::string& from, const std::string& to, double fraction);

    const std::map<std::string, Road>& roads() const noexcept { return roads_; }
    bool contains(const std::string& id) const { return roads_.count(id) != 0; }
    const Road& at(const std::string& id) const;
    std::size_t size() const noexcept { return roads_.size(); }

private:
    std::map<std::string, Road> roads_;
};

/// Line-oriented text format:
///   ROAD,road_id,x1,y1,x2,y2,...
///   TURN,from_id,to_id,fraction
void write_network_file(const RoadNetwork& network, const std::string& path);
RoadNetwork read_network_file(const std::string& path);

}  // namespace flowcast
