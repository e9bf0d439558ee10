#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trajk/road_graph.hpp"

namespace trajk {

/// Node sequence with its geographic length. Consecutive nodes are adjacent
/// in the graph that produced the path; a single-node path has zero hops
/// and zero length.
struct Path {
    std::vector<NodeId> nodes;
    double length_m = 0.0;

    std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

/// Minimum-length path from s to t by edge length, or nullopt when t is
/// unreachable. Equal-cost relaxations keep the smallest predecessor id and
/// the queue pops smaller ids first, so the result is stable across runs
/// and platforms. s == t yields the single-node path.
std::optional<Path> dijkstra(const RoadGraph& graph, NodeId s, NodeId t);

/// Hop count of the shortest path; nullopt iff s and t are disconnected.
std::optional<std::uint32_t> shortest_hop_count(const RoadGraph& graph, NodeId s, NodeId t);

}  // namespace trajk
