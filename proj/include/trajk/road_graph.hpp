#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "trajk/geo.hpp"

namespace trajk {

/// Node identifiers are dense: every id is an index into [0, node_count).
using NodeId = std::uint32_t;

/// Undirected road link between two intersections. Canonical form keeps
/// u < v; at most one edge exists per node pair.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    double length_m = 0.0;
};

inline bool operator==(const Edge& a, const Edge& b) {
    return a.u == b.u && a.v == b.v && a.length_m == b.length_m;
}

struct Neighbor {
    NodeId to = 0;
    double length_m = 0.0;
};

/// Uniform lat/lon bucket grid over the node set. Cell lookup is O(1);
/// the nearest-node search expands outward ring by ring from a query cell.
class GridIndex {
public:
    GridIndex() = default;

    /// cell_size_deg <= 0 picks the default: bounding-box diagonal / 32.
    static GridIndex build(const std::vector<GeoPoint>& coords, double cell_size_deg = 0.0);

    long rows() const { return rows_; }
    long cols() const { return cols_; }
    double cell_size_deg() const { return cell_deg_; }
    double min_lat() const { return min_lat_; }
    double max_lat() const { return max_lat_; }

    /// Signed cell coordinates of a point; may fall outside [0, rows) x [0, cols).
    std::pair<long, long> cell_of(const GeoPoint& p) const;

    const std::vector<NodeId>& cell(long row, long col) const;

private:
    double min_lat_ = 0.0;
    double max_lat_ = 0.0;
    double min_lon_ = 0.0;
    double cell_deg_ = 1.0;
    long rows_ = 0;
    long cols_ = 0;
    std::vector<std::vector<NodeId>> cells_;  // row-major
};

/// Immutable road network: node coordinates, canonical undirected edge list,
/// per-node adjacency sorted by neighbor id, and a grid spatial index.
/// Safe for unrestricted concurrent reads once built.
class RoadGraph {
public:
    RoadGraph() = default;

    /// Validates and canonicalizes the inputs: coordinates in range, edge
    /// endpoints in bounds, no self-loops or duplicate pairs, strictly
    /// positive lengths. Throws ParseError on any violation.
    static RoadGraph build(std::vector<GeoPoint> coords, std::vector<Edge> edges);

    std::size_t node_count() const { return coords_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<GeoPoint>& coords() const { return coords_; }
    const GeoPoint& coord(NodeId n) const { return coords_[n]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Neighbor>& neighbors(NodeId n) const { return adjacency_[n]; }
    const GridIndex& grid() const { return grid_; }

    bool operator==(const RoadGraph& other) const {
        return coords_ == other.coords_ && edges_ == other.edges_;
    }

    /// Nearest node by equirectangular distance; ties resolve to the
    /// smallest node id. Grid-accelerated: rings are scanned outward until
    /// the best candidate is provably closer than any unvisited ring.
    NodeId nearest_node(const GeoPoint& p) const;

private:
    std::vector<GeoPoint> coords_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    GridIndex grid_;
};

/// Reads the two-section map CSV: a `#nodes` line followed by id,lat,lon
/// rows, then a `#edges` line followed by u,v[,length_m] rows. Missing
/// lengths are computed from the endpoint coordinates.
RoadGraph load_graph(const std::filesystem::path& map_file);

/// Writes the canonical form of the same format (lengths always present,
/// shortest round-trip number formatting). load(save(g)) == g.
void save_graph(const RoadGraph& graph, const std::filesystem::path& map_file);

}  // namespace trajk
