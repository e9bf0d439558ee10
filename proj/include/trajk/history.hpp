#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "trajk/records.hpp"
#include "trajk/road_graph.hpp"

namespace trajk {

/// A run is one maximal graph-connected, time-contiguous movement of a
/// single user. Run ids are assigned sequentially in log order.
using RunId = std::uint32_t;

struct HistoryEntry {
    NodeId node = 0;
    RunId run = 0;
};

inline bool operator==(const HistoryEntry& a, const HistoryEntry& b) {
    return a.node == b.node && a.run == b.run;
}

/// Flat, scan-ordered trajectory database. When built by this library,
/// entries of a run are contiguous and consecutive entries of a run never
/// repeat a node; hand-assembled logs are accepted as-is.
class HistoryLog {
public:
    HistoryLog() = default;
    explicit HistoryLog(std::vector<HistoryEntry> entries) : entries_(std::move(entries)) {}

    const std::vector<HistoryEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Number of distinct run ids present.
    std::size_t run_count() const;

    /// True when every run occupies one contiguous span of the log.
    bool runs_contiguous() const;

private:
    std::vector<HistoryEntry> entries_;
};

/// nullopt = no hop limit.
using HopLimit = std::optional<std::uint32_t>;

/// Result of one log scan: matched node sequences in scan order. Duplicate
/// sequences are kept; the hit count is exactly the number of paths.
struct HistoryHit {
    std::vector<std::vector<NodeId>> paths;

    std::size_t hit_count() const { return paths.size(); }
};

/// Instrumentation for the scan-cost contract: every entry read counts once.
struct SearchStats {
    std::uint64_t entries_visited = 0;
};

/// Builds the run-structured log from prior-period raw records. Per user:
/// samples are node-approximated and collapsed (user_node_sequences), then
/// every consecutive node pair is replaced by its shortest path, with the
/// shared junction node dropped at each join. A disconnected pair splits
/// the user's sequence into separate runs. Users are laid out in ascending
/// id order, runs in time order, each run contiguous.
HistoryLog build_history_log(const RoadGraph& graph, const std::vector<LocationRecord>& raw);

/// Single forward scan of the whole log. Every occurrence of n_s opens a
/// tracking window over its run; the window closes when the run id changes,
/// when the walk loops back to n_s, or once max_hop extensions were made.
/// Appending n_e records the window as a hit and closes it; the check runs
/// after the append, so a hit on the hop boundary still counts. The outer
/// scan always resumes at the next entry, so overlapping matches all count
/// and nothing is deduplicated.
HistoryHit history_search(const HistoryLog& log, NodeId n_s, NodeId n_e, HopLimit max_hop,
                          SearchStats* stats = nullptr);

/// Hop budget for a query: shortest-path hop count plus the configured
/// slack. Unlimited when the filter is off or no baseline path exists.
HopLimit max_hop_for(const RoadGraph& graph, NodeId n_s, NodeId n_e, std::uint32_t delta_h,
                     bool filter_enabled);

/// Binary log file: magic "THL1", entry count as little-endian u64, then
/// (node u32, run u32) little-endian pairs. Round trips are byte-exact.
void save_history_log(const HistoryLog& log, const std::filesystem::path& file);

/// Throws ParseError on malformed files and on logs whose runs are not
/// contiguous.
HistoryLog load_history_log(const std::filesystem::path& file);

/// Debug export: `node,run` CSV.
void export_history_csv(const HistoryLog& log, const std::filesystem::path& file);

/// Deterministic truncate/extend for throughput sweeps: truncation keeps a
/// prefix, extension appends whole-log copies with relabeled run ids.
/// Extending an empty log is impossible and throws.
HistoryLog resize_history_log(const HistoryLog& log, std::uint64_t target_entries);

}  // namespace trajk
