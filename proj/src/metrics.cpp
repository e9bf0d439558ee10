#include "trajk/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "text_util.hpp"
#include "trajk/errors.hpp"

namespace trajk {

RetentionReport retention_rate(const std::set<SegmentKey>& seen,
                               const std::set<SegmentKey>& published, std::uint32_t k) {
    if (seen.empty()) {
        throw std::domain_error("retention rate undefined: no segment ever contributed");
    }
    if (!std::includes(seen.begin(), seen.end(), published.begin(), published.end())) {
        throw std::invalid_argument("published segments must be a subset of seen segments");
    }
    RetentionReport report;
    report.k = k;
    report.published = published.size();
    report.total_input = seen.size();
    report.rate_pct = 100.0 * static_cast<double>(published.size()) /
                      static_cast<double>(seen.size());
    return report;
}

std::vector<RetentionReport> retention_curve(const PipelineOutput& output,
                                             std::span<const std::uint32_t> k_values) {
    for (std::size_t i = 1; i < k_values.size(); ++i) {
        if (k_values[i] <= k_values[i - 1]) {
            throw std::invalid_argument("k values must be strictly ascending");
        }
    }
    std::vector<RetentionReport> curve;
    curve.reserve(k_values.size());
    for (const std::uint32_t k : k_values) {
        std::set<SegmentKey> published;
        for (const auto& [key, acc] : output.counter.table()) {
            if (meets_threshold(acc, k)) {
                published.insert(key);
            }
        }
        curve.push_back(retention_rate(output.counter.seen(), published, k));
    }
    return curve;
}

std::vector<HopFilterDelta> hop_filter_impact(const PipelineOutput& with_filter,
                                              const PipelineOutput& without_filter,
                                              std::span<const std::uint32_t> k_values) {
    if (!with_filter.options.hop_filter || without_filter.options.hop_filter) {
        throw std::invalid_argument("expected one filtered and one unfiltered run");
    }
    if (with_filter.options.k != without_filter.options.k ||
        with_filter.options.delta_h != without_filter.options.delta_h) {
        throw std::invalid_argument("runs must share k and delta_h");
    }

    std::vector<HopFilterDelta> deltas;
    deltas.reserve(k_values.size());
    for (const std::uint32_t k : k_values) {
        const auto with_count = static_cast<double>(with_filter.counter.published_count(k));
        const auto without_count =
            static_cast<double>(without_filter.counter.published_count(k));
        HopFilterDelta delta;
        delta.k = k;
        if (without_count > 0.0) {
            // Clamped at zero: the filter is a removal mechanism, and the
            // report tracks how much it suppressed.
            delta.delta_pct =
                std::max(0.0, 100.0 * (without_count - with_count) / without_count);
        }
        deltas.push_back(delta);
    }
    return deltas;
}

double hw_throughput(const HwModelParams& params, std::uint64_t history_size) {
    if (params.entries_per_cycle == 0) {
        throw std::domain_error("entries_per_cycle must be positive");
    }
    const std::uint64_t scan_cycles =
        (history_size + params.entries_per_cycle - 1) / params.entries_per_cycle;
    const std::uint64_t cycles = params.overhead_cycles + scan_cycles;
    if (cycles == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return params.f_clk_hz / static_cast<double>(cycles);
}

ThroughputMeasurement measure_sw_throughput(const RoadGraph& graph, const HistoryLog& log,
                                            const std::vector<LocationRecord>& records,
                                            const PipelineOptions& options, int repetitions) {
    ThroughputMeasurement measurement;
    const int reps = std::max(1, repetitions);
    for (int rep = 0; rep < reps; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const PipelineOutput output = run_pipeline(graph, log, records, options);
        const auto stop = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(stop - start).count();
        const double pairs = static_cast<double>(output.reports.size());
        measurement.pairs_per_sec.push_back(seconds > 0.0 ? pairs / seconds
                                                          : std::numeric_limits<double>::infinity());
    }

    std::vector<double> sorted = measurement.pairs_per_sec;
    std::sort(sorted.begin(), sorted.end());
    measurement.min_rate = sorted.front();
    const std::size_t mid = sorted.size() / 2;
    measurement.median_rate = sorted.size() % 2 == 1
                                  ? sorted[mid]
                                  : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return measurement;
}

void write_retention_csv(const std::vector<RetentionReport>& reports,
                         const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write retention CSV: " + file.string());
    }
    out << "k,published,total,rate_pct\n";
    for (const RetentionReport& r : reports) {
        out << r.k << ',' << r.published << ',' << r.total_input << ','
            << detail::format_fixed(r.rate_pct, 3) << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing retention CSV: " + file.string());
    }
}

void write_hop_impact_csv(const std::vector<HopFilterDelta>& deltas,
                          const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write hop-impact CSV: " + file.string());
    }
    out << "k,delta_pct\n";
    for (const HopFilterDelta& d : deltas) {
        out << d.k << ',' << detail::format_fixed(d.delta_pct, 3) << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing hop-impact CSV: " + file.string());
    }
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write bench CSV: " + file.string());
    }
    out << "history_size,source,records_per_sec\n";
    for (const BenchRow& row : rows) {
        out << row.history_size << ',' << row.source << ','
            << detail::format_fixed(row.records_per_sec, 3) << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing bench CSV: " + file.string());
    }
}

}  // namespace trajk
