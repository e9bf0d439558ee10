#include "trajk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "trajk/shortest_path.hpp"

namespace trajk {

namespace {

// splitmix64. Tiny, seedable, and bit-identical on every platform, which
// the standard <random> distributions do not guarantee.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

constexpr std::int64_t kHistoryT0 = 1700000000;  // history hour
constexpr std::int64_t kCurrentT0 = kHistoryT0 + 3600;

/// Evenly spaced interior grid lines, margin two cells from the border so
/// corridor trips can start beside them.  Collapses duplicates on grids too
/// small to hold the requested count.
std::vector<int> spread_lines(int n, int count) {
    std::set<int> positions;
    for (int i = 0; i < count; ++i) {
        positions.insert(2 + ((i + 1) * (n - 5)) / (count + 1));
    }
    return {positions.begin(), positions.end()};
}

}  // namespace

SynthCity synth_city(const SynthParams& params) {
    const int n = params.grid;
    if (n < 2) {
        throw std::invalid_argument("grid must be at least 2");
    }
    if (!(params.arterial_fraction >= 0.0 && params.arterial_fraction <= 1.0)) {
        throw std::invalid_argument("arterial_fraction must be in [0, 1]");
    }
    if (params.users < 0) {
        throw std::invalid_argument("users must be non-negative");
    }
    if (params.samples_per_user < 2) {
        throw std::invalid_argument("samples_per_user must be at least 2");
    }
    if (!(params.spacing_deg > 0.0)) {
        throw std::invalid_argument("spacing_deg must be positive");
    }

    SplitMix64 rng(params.seed);
    const auto id_of = [n](int row, int col) {
        return static_cast<NodeId>(row * n + col);
    };

    std::vector<GeoPoint> coords;
    coords.reserve(static_cast<std::size_t>(n) * n);
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            coords.push_back({params.base_lat + row * params.spacing_deg,
                              params.base_lon + col * params.spacing_deg});
        }
    }

    // Arterial grid lines: interior rows and columns, split evenly between
    // the two orientations. Grids under 6 cells have no interior room.
    const int total_lines =
        n >= 6 ? static_cast<int>(std::lround(params.arterial_fraction * n)) : 0;
    const std::vector<int> arterial_rows = spread_lines(n, (total_lines + 1) / 2);
    const std::vector<int> arterial_cols = spread_lines(n, total_lines / 2);
    std::vector<char> is_arterial_row(n, 0);
    std::vector<char> is_arterial_col(n, 0);
    for (const int row : arterial_rows) {
        is_arterial_row[row] = 1;
    }
    for (const int col : arterial_cols) {
        is_arterial_col[col] = 1;
    }

    // Arterial edges keep their exact geometric length; side streets get a
    // small deterministic jitter, so the shortest route prefers arterials
    // on ties and golden outputs stay stable.
    std::vector<Edge> edges;
    std::vector<SegmentKey> arterial_edges;
    const auto add_edge = [&](NodeId u, NodeId v, bool arterial) {
        double length = equirect_distance_m(coords[u], coords[v]);
        if (!arterial) {
            length *= 1.0 + 0.04 * rng.unit();
        } else {
            arterial_edges.push_back(make_segment(u, v));
        }
        edges.push_back({u, v, length});
    };
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col + 1 < n; ++col) {
            add_edge(id_of(row, col), id_of(row, col + 1), is_arterial_row[row] != 0);
        }
    }
    for (int row = 0; row + 1 < n; ++row) {
        for (int col = 0; col < n; ++col) {
            add_edge(id_of(row, col), id_of(row + 1, col), is_arterial_col[col] != 0);
        }
    }
    std::sort(arterial_edges.begin(), arterial_edges.end());

    SynthCity city;
    city.graph = RoadGraph::build(std::move(coords), std::move(edges));
    city.arterial_edges = std::move(arterial_edges);

    // Trip templates. Shared between the history and current periods, so
    // current-period movement actually has matching history. Three quarters
    // of the templates ride an arterial corridor when one exists.
    const int template_count = std::max(4, params.users / 8);
    std::vector<std::vector<NodeId>> templates;
    templates.reserve(template_count);
    for (int t = 0; t < template_count; ++t) {
        const bool corridor = !arterial_rows.empty() && rng.unit() < 0.75;
        std::vector<NodeId> route;
        if (corridor) {
            const int r0 = arterial_rows[rng.below(arterial_rows.size())];
            const int side = rng.below(2) == 0 ? -1 : 1;
            const int o1 = 1 + static_cast<int>(rng.below(2));
            const int o2 = 1 + static_cast<int>(rng.below(2));
            const int col_a = static_cast<int>(rng.below(std::max(1, n / 3)));
            const int col_b = n - 1 - static_cast<int>(rng.below(std::max(1, n / 3)));

            // Perpendicular leg in, along the corridor, perpendicular leg
            // out — both legs on the same side, so the shortest route
            // between the endpoints never climbs onto the corridor itself.
            for (int row = r0 + side * o1; row != r0; row -= side) {
                route.push_back(id_of(row, col_a));
            }
            for (int col = col_a; col <= col_b; ++col) {
                route.push_back(id_of(r0, col));
            }
            const int row_end = r0 + side * o2;
            for (int row = r0 + side; row != row_end + side; row += side) {
                route.push_back(id_of(row, col_b));
            }
            if (rng.below(2) == 1) {
                std::reverse(route.begin(), route.end());
            }
        } else {
            const auto node_total = static_cast<std::uint64_t>(n) * n;
            NodeId u = 0;
            NodeId v = 0;
            do {
                u = static_cast<NodeId>(rng.below(node_total));
                v = static_cast<NodeId>(rng.below(node_total));
            } while (u == v);
            route = dijkstra(city.graph, u, v)->nodes;  // lattice: always connected
        }
        templates.push_back(std::move(route));
    }

    // History period: waypoint-dense samples (every second route node), so
    // shortest-path gap filling reconstructs the traveled route.
    for (int user = 0; user < params.users; ++user) {
        const auto& route = templates[rng.below(templates.size())];
        std::vector<std::size_t> waypoints;
        for (std::size_t i = 0; i < route.size(); i += 2) {
            waypoints.push_back(i);
        }
        if (waypoints.back() != route.size() - 1) {
            waypoints.push_back(route.size() - 1);
        }
        std::int64_t ts = kHistoryT0;
        for (const std::size_t w : waypoints) {
            city.history_records.push_back(
                {static_cast<std::uint32_t>(user), city.graph.coord(route[w]), ts});
            ts += 30;
        }
    }

    // Current period: sparse samples; the route between them is what the
    // anonymizer has to estimate.
    for (int user = 0; user < params.users; ++user) {
        const auto& route = templates[rng.below(templates.size())];
        const std::size_t last = route.size() - 1;
        std::int64_t ts = kCurrentT0;
        for (int i = 0; i < params.samples_per_user; ++i) {
            const std::size_t idx = last * static_cast<std::size_t>(i) /
                                    static_cast<std::size_t>(params.samples_per_user - 1);
            city.current_records.push_back(
                {static_cast<std::uint32_t>(user), city.graph.coord(route[idx]), ts});
            ts += 30;
        }
    }

    return city;
}

}  // namespace trajk
