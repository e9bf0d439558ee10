#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "trajk/errors.hpp"
#include "trajk/road_graph.hpp"

using namespace trajk;

namespace {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
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

RoadGraph lattice(int n, double spacing = 0.001) {
    std::vector<GeoPoint> coords;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            coords.push_back({35.0 + r * spacing, 139.0 + c * spacing});
        }
    }
    std::vector<Edge> edges;
    const auto id = [n](int r, int c) { return static_cast<NodeId>(r * n + c); };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c + 1 < n; ++c) {
            edges.push_back({id(r, c), id(r, c + 1),
                             equirect_distance_m(coords[id(r, c)], coords[id(r, c + 1)])});
        }
    }
    for (int r = 0; r + 1 < n; ++r) {
        for (int c = 0; c < n; ++c) {
            edges.push_back({id(r, c), id(r + 1, c),
                             equirect_distance_m(coords[id(r, c)], coords[id(r + 1, c)])});
        }
    }
    return RoadGraph::build(std::move(coords), std::move(edges));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("two nodes, one edge: adjacency both ways") {
    const auto g = RoadGraph::build({{35.0, 139.0}, {35.001, 139.0}}, {{0, 1, 111.0}});
    REQUIRE(g.node_count() == 2);
    REQUIRE(g.edge_count() == 1);
    REQUIRE(g.neighbors(0).size() == 1);
    CHECK(g.neighbors(0)[0].to == 1);
    REQUIRE(g.neighbors(1).size() == 1);
    CHECK(g.neighbors(1)[0].to == 0);
    CHECK(g.neighbors(1)[0].length_m == 111.0);
}

TEST_CASE("graph validation rejects bad input") {
    const std::vector<GeoPoint> two = {{35.0, 139.0}, {35.001, 139.0}};
    CHECK_THROWS_AS(RoadGraph::build(two, {{0, 99, 1.0}}), ParseError);   // dangling
    CHECK_THROWS_AS(RoadGraph::build(two, {{1, 1, 1.0}}), ParseError);    // self loop
    CHECK_THROWS_AS(RoadGraph::build(two, {{0, 1, 0.0}}), ParseError);    // zero length
    CHECK_THROWS_AS(RoadGraph::build(two, {{0, 1, -3.0}}), ParseError);   // negative
    CHECK_THROWS_AS(RoadGraph::build(two, {{0, 1, 1.0}, {1, 0, 2.0}}), ParseError);  // dup
    CHECK_THROWS_AS(RoadGraph::build({{95.0, 0.0}}, {}), ParseError);     // bad lat
}

TEST_CASE("edges canonicalize to u < v") {
    const auto g = RoadGraph::build({{35.0, 139.0}, {35.001, 139.0}}, {{1, 0, 111.0}});
    CHECK(g.edges()[0].u == 0);
    CHECK(g.edges()[0].v == 1);
}

TEST_CASE("10x10 lattice has 100 nodes and 180 edges") {
    const auto g = lattice(10);
    CHECK(g.node_count() == 100);
    CHECK(g.edge_count() == 180);  // 2 * n * (n-1)
}

TEST_CASE("nearest node at exact coordinates is the node itself") {
    const auto g = lattice(10);
    for (NodeId id = 0; id < g.node_count(); ++id) {
        CHECK(g.nearest_node(g.coord(id)) == id);
    }
}

TEST_CASE("equidistant points resolve to the smaller node id") {
    // Nodes 3 and 5 share one location, so every query point is exactly
    // equidistant to both and the smaller id must win.
    const std::vector<GeoPoint> coords = {
        {35.00, 139.000}, {35.00, 139.001}, {35.00, 139.002},
        {35.01, 139.010},  // node 3
        {35.00, 139.003},
        {35.01, 139.010},  // node 5: same spot as node 3
    };
    const auto g = RoadGraph::build(coords, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0},
                                             {3, 4, 1.0}, {4, 5, 1.0}});
    CHECK(g.nearest_node({35.0099, 139.0101}) == 3);
    CHECK(g.nearest_node(coords[3]) == 3);
    CHECK(g.nearest_node({35.02, 139.02}) == 3);
}

TEST_CASE("grid-accelerated nearest matches the exhaustive oracle") {
    Rng rng(42);
    std::vector<GeoPoint> coords;
    for (int i = 0; i < 50; ++i) {
        coords.push_back({35.0 + rng.unit() * 0.05, 139.0 + rng.unit() * 0.05});
    }
    std::vector<Edge> edges;
    for (NodeId i = 1; i < coords.size(); ++i) {
        edges.push_back({i - 1, i, 1.0});
    }
    const auto g = RoadGraph::build(coords, edges);

    for (int trial = 0; trial < 500; ++trial) {
        // Mostly inside the bounding box, sometimes far outside it.
        const double span = trial % 7 == 0 ? 0.5 : 0.05;
        const GeoPoint p{35.0 - span / 4 + rng.unit() * span,
                         139.0 - span / 4 + rng.unit() * span};
        CHECK(g.nearest_node(p) == oracle::linear_nearest(g.coords(), p));
    }
}

TEST_CASE("map file round trip preserves the graph exactly") {
    TempDir dir;
    const auto g = lattice(7);
    save_graph(g, dir.file("map.csv"));
    const auto reloaded = load_graph(dir.file("map.csv"));
    CHECK(reloaded == g);
    // And a second hop: save the reloaded graph, byte-compare.
    save_graph(reloaded, dir.file("map2.csv"));
    std::ifstream a(dir.file("map.csv")), b(dir.file("map2.csv"));
    const std::string text_a((std::istreambuf_iterator<char>(a)),
                             std::istreambuf_iterator<char>());
    const std::string text_b((std::istreambuf_iterator<char>(b)),
                             std::istreambuf_iterator<char>());
    CHECK(text_a == text_b);
}

TEST_CASE("map files missing a length column compute it from coordinates") {
    TempDir dir;
    write_file(dir.file("map.csv"),
               "#nodes\n0,35.0,139.0\n1,35.001,139.0\n#edges\n0,1\n");
    const auto g = load_graph(dir.file("map.csv"));
    CHECK(g.edges()[0].length_m ==
          equirect_distance_m(g.coord(0), g.coord(1)));
}

TEST_CASE("malformed map files raise parse errors") {
    TempDir dir;
    write_file(dir.file("nosec.csv"), "0,35.0,139.0\n");
    CHECK_THROWS_AS(load_graph(dir.file("nosec.csv")), ParseError);

    write_file(dir.file("badnum.csv"), "#nodes\n0,hello,139.0\n#edges\n");
    CHECK_THROWS_AS(load_graph(dir.file("badnum.csv")), ParseError);

    write_file(dir.file("dangle.csv"), "#nodes\n0,35.0,139.0\n1,35.001,139.0\n#edges\n0,99\n");
    CHECK_THROWS_AS(load_graph(dir.file("dangle.csv")), ParseError);

    write_file(dir.file("neglen.csv"),
               "#nodes\n0,35.0,139.0\n1,35.001,139.0\n#edges\n0,1,-5\n");
    CHECK_THROWS_AS(load_graph(dir.file("neglen.csv")), ParseError);

    write_file(dir.file("sparseids.csv"), "#nodes\n0,35.0,139.0\n7,35.001,139.0\n#edges\n");
    CHECK_THROWS_AS(load_graph(dir.file("sparseids.csv")), ParseError);

    CHECK_THROWS_AS(load_graph(dir.file("missing.csv")), IoError);
}

TEST_CASE("windows line endings parse identically") {
    TempDir dir;
    write_file(dir.file("map.csv"),
               "#nodes\r\n0,35.0,139.0\r\n1,35.001,139.0\r\n#edges\r\n0,1,111.0\r\n");
    const auto g = load_graph(dir.file("map.csv"));
    CHECK(g.node_count() == 2);
    CHECK(g.edges()[0].length_m == 111.0);
}
