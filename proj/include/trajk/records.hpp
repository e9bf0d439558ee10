#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "trajk/geo.hpp"
#include "trajk/road_graph.hpp"

namespace trajk {

/// One raw location sample: who, where, when.
struct LocationRecord {
    std::uint32_t user = 0;
    GeoPoint point;
    std::int64_t ts = 0;  // seconds since epoch
};

/// Reads `user_id,lat,lon,ts` CSV (header row required).
std::vector<LocationRecord> load_records(const std::filesystem::path& file);

void save_records(const std::vector<LocationRecord>& records, const std::filesystem::path& file);

/// Shared front half of both pipelines: groups records per user (ascending
/// id), orders each user's samples by timestamp, approximates every sample
/// to its nearest node, and collapses consecutive repeats. Users with no
/// records do not appear; each remaining sequence is nonempty.
std::vector<std::pair<std::uint32_t, std::vector<NodeId>>> user_node_sequences(
    const RoadGraph& graph, const std::vector<LocationRecord>& records);

}  // namespace trajk
