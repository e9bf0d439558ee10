#include "trajk/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "text_util.hpp"
#include "trajk/errors.hpp"

namespace trajk {

GridIndex GridIndex::build(const std::vector<GeoPoint>& coords, double cell_size_deg) {
    GridIndex g;
    if (coords.empty()) {
        return g;
    }

    double min_lat = coords[0].lat;
    double max_lat = coords[0].lat;
    double min_lon = coords[0].lon;
    double max_lon = coords[0].lon;
    for (const GeoPoint& p : coords) {
        min_lat = std::min(min_lat, p.lat);
        max_lat = std::max(max_lat, p.lat);
        min_lon = std::min(min_lon, p.lon);
        max_lon = std::max(max_lon, p.lon);
    }

    const double dlat = max_lat - min_lat;
    const double dlon = max_lon - min_lon;
    double cell = cell_size_deg;
    if (cell <= 0.0) {
        cell = std::sqrt(dlat * dlat + dlon * dlon) / 32.0;
    }
    if (cell <= 0.0) {
        cell = 1.0;  // all nodes coincide: one cell is enough
    }

    g.min_lat_ = min_lat;
    g.max_lat_ = max_lat;
    g.min_lon_ = min_lon;
    g.cell_deg_ = cell;
    g.rows_ = static_cast<long>(std::floor(dlat / cell)) + 1;
    g.cols_ = static_cast<long>(std::floor(dlon / cell)) + 1;
    g.cells_.assign(static_cast<std::size_t>(g.rows_) * static_cast<std::size_t>(g.cols_), {});

    for (NodeId id = 0; id < coords.size(); ++id) {
        const auto [row, col] = g.cell_of(coords[id]);
        g.cells_[static_cast<std::size_t>(row) * g.cols_ + col].push_back(id);
    }
    return g;
}

std::pair<long, long> GridIndex::cell_of(const GeoPoint& p) const {
    const long row = static_cast<long>(std::floor((p.lat - min_lat_) / cell_deg_));
    const long col = static_cast<long>(std::floor((p.lon - min_lon_) / cell_deg_));
    return {row, col};
}

const std::vector<NodeId>& GridIndex::cell(long row, long col) const {
    static const std::vector<NodeId> kEmpty;
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
        return kEmpty;
    }
    return cells_[static_cast<std::size_t>(row) * cols_ + col];
}

RoadGraph RoadGraph::build(std::vector<GeoPoint> coords, std::vector<Edge> edges) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const GeoPoint& p = coords[i];
        if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
            throw ParseError("node " + std::to_string(i) + ": coordinates out of range");
        }
    }

    const std::size_t n = coords.size();
    for (Edge& e : edges) {
        if (e.u >= n || e.v >= n) {
            throw ParseError("edge " + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ": dangling endpoint");
        }
        if (e.u == e.v) {
            throw ParseError("edge " + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ": self loop");
        }
        if (e.v < e.u) {
            std::swap(e.u, e.v);
        }
        if (!(e.length_m > 0.0)) {
            throw ParseError("edge " + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ": non-positive length");
        }
    }

    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
            throw ParseError("edge " + std::to_string(edges[i].u) + "," +
                             std::to_string(edges[i].v) + ": duplicate");
        }
    }

    RoadGraph g;
    g.adjacency_.assign(n, {});
    for (const Edge& e : edges) {
        g.adjacency_[e.u].push_back({e.v, e.length_m});
        g.adjacency_[e.v].push_back({e.u, e.length_m});
    }
    for (auto& nbrs : g.adjacency_) {
        std::sort(nbrs.begin(), nbrs.end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.to < b.to; });
    }
    g.grid_ = GridIndex::build(coords);
    g.coords_ = std::move(coords);
    g.edges_ = std::move(edges);
    return g;
}

NodeId RoadGraph::nearest_node(const GeoPoint& p) const {
    const auto [qr, qc] = grid_.cell_of(p);
    const long rows = grid_.rows();
    const long cols = grid_.cols();

    // Farthest ring that can still contain a grid cell.
    const long max_ring = std::max(std::max(qr, rows - 1 - qr), std::max(qc, cols - 1 - qc));

    // Meters-per-degree floor for the ring bound. The lon component shrinks
    // by cos(mean lat); the mean of the query lat and any node lat lies
    // between the two cell-extreme means, and cos is concave on [-90, 90],
    // so the interval minimum sits at an endpoint.
    const double cos_a = std::cos(0.5 * (p.lat + grid_.min_lat()) * kDegToRad);
    const double cos_b = std::cos(0.5 * (p.lat + grid_.max_lat()) * kDegToRad);
    const double cos_floor = std::max(0.0, std::min(cos_a, cos_b));
    const double meters_per_deg = kEarthRadiusM * kDegToRad * std::min(1.0, cos_floor);

    NodeId best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    bool found = false;

    const auto consider = [&](long row, long col) {
        for (const NodeId id : grid_.cell(row, col)) {
            const double d = equirect_distance_m(p, coords_[id]);
            if (d < best_dist || (d == best_dist && id < best)) {
                best_dist = d;
                best = id;
                found = true;
            }
        }
    };

    for (long ring = 0; ring <= max_ring; ++ring) {
        if (found && ring > 0) {
            // Every cell at this ring is at least (ring-1) cells away from
            // the query point in lat or lon. Strict inequality keeps the
            // smallest-id tie-break intact: we only stop when no unvisited
            // node can even equal the best distance.
            const double bound = static_cast<double>(ring - 1) * grid_.cell_size_deg() *
                                 meters_per_deg;
            if (best_dist < bound) {
                break;
            }
        }
        if (ring == 0) {
            consider(qr, qc);
            continue;
        }
        for (long col = qc - ring; col <= qc + ring; ++col) {
            consider(qr - ring, col);
            consider(qr + ring, col);
        }
        for (long row = qr - ring + 1; row <= qr + ring - 1; ++row) {
            consider(row, qc - ring);
            consider(row, qc + ring);
        }
    }
    return best;
}

namespace {

struct RawEdge {
    NodeId u = 0;
    NodeId v = 0;
    bool has_length = false;
    double length_m = 0.0;
    std::size_t line_no = 0;
};

[[noreturn]] void fail(const std::filesystem::path& file, std::size_t line_no,
                       const std::string& msg) {
    throw ParseError(file.string() + ":" + std::to_string(line_no) + ": " + msg);
}

}  // namespace

RoadGraph load_graph(const std::filesystem::path& map_file) {
    std::ifstream in(map_file);
    if (!in) {
        throw IoError("cannot open map file: " + map_file.string());
    }

    enum class Section { preamble, nodes, edges };
    Section section = Section::preamble;

    struct RawNode {
        NodeId id = 0;
        GeoPoint point;
    };
    std::vector<RawNode> raw_nodes;
    std::vector<RawEdge> raw_edges;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) {
            continue;
        }
        if (line == "#nodes") {
            if (section != Section::preamble) {
                fail(map_file, line_no, "unexpected #nodes section");
            }
            section = Section::nodes;
            continue;
        }
        if (line == "#edges") {
            if (section != Section::nodes) {
                fail(map_file, line_no, "unexpected #edges section");
            }
            section = Section::edges;
            continue;
        }

        const auto fields = detail::split_fields(line);
        if (section == Section::nodes) {
            if (fields.size() != 3) {
                fail(map_file, line_no, "expected id,lat,lon");
            }
            RawNode node;
            if (!detail::parse_int(fields[0], node.id) ||
                !detail::parse_double(fields[1], node.point.lat) ||
                !detail::parse_double(fields[2], node.point.lon)) {
                fail(map_file, line_no, "malformed node row");
            }
            raw_nodes.push_back(node);
        } else if (section == Section::edges) {
            if (fields.size() != 2 && fields.size() != 3) {
                fail(map_file, line_no, "expected u,v[,length_m]");
            }
            RawEdge edge;
            edge.line_no = line_no;
            if (!detail::parse_int(fields[0], edge.u) || !detail::parse_int(fields[1], edge.v)) {
                fail(map_file, line_no, "malformed edge row");
            }
            if (fields.size() == 3) {
                if (!detail::parse_double(fields[2], edge.length_m)) {
                    fail(map_file, line_no, "malformed edge length");
                }
                edge.has_length = true;
            }
            raw_edges.push_back(edge);
        } else {
            fail(map_file, line_no, "data before #nodes header");
        }
    }
    if (section != Section::edges) {
        throw ParseError(map_file.string() + ": missing #nodes/#edges sections");
    }

    // Node ids must be dense: exactly the range [0, count).
    std::vector<GeoPoint> coords(raw_nodes.size());
    std::vector<char> seen(raw_nodes.size(), 0);
    for (const RawNode& node : raw_nodes) {
        if (node.id >= raw_nodes.size() || seen[node.id]) {
            throw ParseError(map_file.string() + ": node ids must be unique and dense, got " +
                             std::to_string(node.id));
        }
        seen[node.id] = 1;
        coords[node.id] = node.point;
    }

    std::vector<Edge> edges;
    edges.reserve(raw_edges.size());
    for (const RawEdge& raw : raw_edges) {
        if (raw.u >= coords.size() || raw.v >= coords.size()) {
            fail(map_file, raw.line_no, "dangling edge endpoint");
        }
        double length = raw.length_m;
        if (!raw.has_length) {
            length = equirect_distance_m(coords[raw.u], coords[raw.v]);
        } else if (!(length > 0.0)) {
            fail(map_file, raw.line_no, "non-positive edge length");
        }
        edges.push_back({raw.u, raw.v, length});
    }

    return RoadGraph::build(std::move(coords), std::move(edges));
}

void save_graph(const RoadGraph& graph, const std::filesystem::path& map_file) {
    std::ofstream out(map_file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write map file: " + map_file.string());
    }
    out << "#nodes\n";
    for (NodeId id = 0; id < graph.node_count(); ++id) {
        const GeoPoint& p = graph.coord(id);
        out << id << ',' << detail::format_double(p.lat) << ',' << detail::format_double(p.lon)
            << '\n';
    }
    out << "#edges\n";
    for (const Edge& e : graph.edges()) {
        out << e.u << ',' << e.v << ',' << detail::format_double(e.length_m) << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing map file: " + map_file.string());
    }
}

}  // namespace trajk
