#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "trajk/fixedpoint.hpp"
#include "trajk/history.hpp"
#include "trajk/records.hpp"
#include "trajk/road_graph.hpp"
#include "trajk/shortest_path.hpp"

namespace trajk {

/// Canonical undirected segment key: a < b always.
struct SegmentKey {
    NodeId a = 0;
    NodeId b = 0;

    auto operator<=>(const SegmentKey&) const = default;
};

inline SegmentKey make_segment(NodeId u, NodeId v) {
    return u < v ? SegmentKey{u, v} : SegmentKey{v, u};
}

/// Consecutive distinct-node samples of one user: the query unit.
struct RecordPair {
    std::uint32_t user = 0;
    NodeId s = 0;
    NodeId e = 0;
};

inline bool operator==(const RecordPair& a, const RecordPair& b) {
    return a.user == b.user && a.s == b.s && a.e == b.e;
}

enum class FallbackReason { none, no_hits, disconnected };

const char* to_string(FallbackReason reason);

/// How one record pair was resolved: via history paths, via the shortest
/// path, or not at all (disconnected with no hits).
struct SelectionReport {
    RecordPair pair;
    bool used_history = false;
    std::uint64_t hits = 0;
    FallbackReason fallback = FallbackReason::none;
};

/// Weighted traversal counts per segment, plus the set of every segment
/// that ever received a contribution (the retention denominator). Ordered
/// by key so publication order is deterministic.
class SegmentCounter {
public:
    void add(SegmentKey key, Q16Weight w);

    /// Exact union: raw accumulators sum, seen sets merge. Merging partial
    /// counters in any order yields identical totals.
    void merge(const SegmentCounter& other);

    const std::map<SegmentKey, Q16Accum>& table() const { return table_; }
    const std::set<SegmentKey>& seen() const { return seen_; }

    /// Number of segments meeting threshold k.
    std::size_t published_count(std::uint32_t k) const;

private:
    std::map<SegmentKey, Q16Accum> table_;
    std::set<SegmentKey> seen_;
};

/// Per user in ascending id order, records sorted by timestamp and
/// node-approximated; every consecutive distinct-node pair becomes one
/// RecordPair. Pairs that collapse to a single node are dropped.
std::vector<RecordPair> pair_records(const RoadGraph& graph,
                                     const std::vector<LocationRecord>& records);

/// One pipeline step: shortest path, hop budget, history scan, then
/// weighted accumulation. h >= 1 hits spread 1/h over every segment
/// occurrence of every hit path; otherwise the shortest path (when one
/// exists) takes a full unit per segment; a disconnected pair with no hits
/// contributes nothing. Exactly one of the two sources ever counts.
SelectionReport process_record_pair(const RoadGraph& graph, const HistoryLog& log,
                                    SegmentCounter& counter, const RecordPair& pair,
                                    std::uint32_t delta_h, bool hop_filter);

using PublishedSegment = std::pair<SegmentKey, double>;

/// Exactly the segments meeting threshold k, in key order, with the
/// accumulator rendered as a float for reporting.
std::vector<PublishedSegment> publish(const SegmentCounter& counter, std::uint32_t k);

struct PipelineOptions {
    std::uint32_t k = 1;
    std::uint32_t delta_h = 5;
    bool hop_filter = true;
    unsigned threads = 1;
};

struct PipelineOutput {
    std::vector<PublishedSegment> published;
    std::vector<SelectionReport> reports;
    SegmentCounter counter;
    PipelineOptions options;  // echo of the settings that produced this output
};

/// End-to-end run over in-memory inputs. Deterministic: identical inputs
/// and options yield identical output, and the thread count only changes
/// the schedule, never the result.
PipelineOutput run_pipeline(const RoadGraph& graph, const HistoryLog& log,
                            const std::vector<LocationRecord>& records,
                            const PipelineOptions& options);

/// `node_a,node_b,count` CSV, count printed with 5 fractional digits.
void write_published_csv(const std::vector<PublishedSegment>& published,
                         const std::filesystem::path& file);

/// `user,s,e,used_history,h,fallback_reason` CSV.
void write_selection_csv(const std::vector<SelectionReport>& reports,
                         const std::filesystem::path& file);

/// GeoJSON FeatureCollection of two-point LineStrings for plotting.
void write_published_geojson(const std::vector<PublishedSegment>& published,
                             const RoadGraph& graph, const std::filesystem::path& file);

}  // namespace trajk
