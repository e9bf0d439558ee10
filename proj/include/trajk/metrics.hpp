#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trajk/anonymizer.hpp"

namespace trajk {

/// Survival of unique segments at one threshold. The denominator is the
/// set of all segments that received any contribution.
struct RetentionReport {
    std::uint32_t k = 0;
    std::size_t published = 0;
    std::size_t total_input = 0;
    double rate_pct = 0.0;
};

/// rate = 100 * |published| / |seen|. Throws domain_error on an empty seen
/// set and invalid_argument when published is not a subset of seen.
RetentionReport retention_rate(const std::set<SegmentKey>& seen,
                               const std::set<SegmentKey>& published, std::uint32_t k);

/// One report per k from a single counter snapshot; k_values must ascend.
std::vector<RetentionReport> retention_curve(const PipelineOutput& output,
                                             std::span<const std::uint32_t> k_values);

struct HopFilterDelta {
    std::uint32_t k = 0;
    double delta_pct = 0.0;
};

/// Per-k relative reduction in published segments caused by the hop filter:
/// 100 * (published_without - published_with) / published_without, or 0
/// when nothing publishes without the filter. The two outputs must come
/// from identical inputs differing only in the filter flag; mismatched
/// configurations throw.
std::vector<HopFilterDelta> hop_filter_impact(const PipelineOutput& with_filter,
                                              const PipelineOutput& without_filter,
                                              std::span<const std::uint32_t> k_values);

/// Parametric throughput model of the streaming search hardware: one query
/// costs a fixed overhead plus a full scan of the history store at
/// entries_per_cycle per clock.
struct HwModelParams {
    double f_clk_hz = 107e6;
    std::uint32_t entries_per_cycle = 4;
    std::uint64_t overhead_cycles = 0;
};

/// f_clk / (overhead + ceil(history_size / entries_per_cycle)) in records
/// per second; +infinity when the denominator is zero.
double hw_throughput(const HwModelParams& params, std::uint64_t history_size);

struct ThroughputMeasurement {
    std::vector<double> pairs_per_sec;  // one entry per repetition
    double min_rate = 0.0;
    double median_rate = 0.0;
};

/// Wall-clock record pairs per second over full pipeline runs.
ThroughputMeasurement measure_sw_throughput(const RoadGraph& graph, const HistoryLog& log,
                                            const std::vector<LocationRecord>& records,
                                            const PipelineOptions& options, int repetitions);

struct BenchRow {
    std::uint64_t history_size = 0;
    std::string source;  // "model" or "measured"
    double records_per_sec = 0.0;
};

void write_retention_csv(const std::vector<RetentionReport>& reports,
                         const std::filesystem::path& file);

void write_hop_impact_csv(const std::vector<HopFilterDelta>& deltas,
                          const std::filesystem::path& file);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file);

}  // namespace trajk
