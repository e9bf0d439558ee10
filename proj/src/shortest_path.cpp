#include "trajk/shortest_path.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace trajk {

std::optional<Path> dijkstra(const RoadGraph& graph, NodeId s, NodeId t) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t n = graph.node_count();

    std::vector<double> dist(n, kInf);
    std::vector<NodeId> pred(n, 0);
    std::vector<char> settled(n, 0);

    using QueueEntry = std::pair<double, NodeId>;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue;

    dist[s] = 0.0;
    pred[s] = s;
    queue.push({0.0, s});

    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (settled[u]) {
            continue;  // stale entry, lazy deletion
        }
        settled[u] = 1;
        if (u == t) {
            break;
        }
        for (const Neighbor& nb : graph.neighbors(u)) {
            if (settled[nb.to]) {
                continue;
            }
            const double nd = d + nb.length_m;
            // Ties keep the smallest predecessor id so equal-length paths
            // resolve identically on every platform.
            if (nd < dist[nb.to]) {
                dist[nb.to] = nd;
                pred[nb.to] = u;
                queue.push({nd, nb.to});
            } else if (nd == dist[nb.to] && u < pred[nb.to]) {
                pred[nb.to] = u;
            }
        }
    }

    if (!settled[t]) {
        return std::nullopt;
    }

    Path path;
    path.length_m = dist[t];
    for (NodeId cur = t;; cur = pred[cur]) {
        path.nodes.push_back(cur);
        if (cur == s) {
            break;
        }
    }
    std::reverse(path.nodes.begin(), path.nodes.end());
    return path;
}

std::optional<std::uint32_t> shortest_hop_count(const RoadGraph& graph, NodeId s, NodeId t) {
    const auto path = dijkstra(graph, s, t);
    if (!path) {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>(path->hops());
}

}  // namespace trajk
