#include "trajk/anonymizer.hpp"

#include <atomic>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "text_util.hpp"
#include "trajk/errors.hpp"

namespace trajk {

const char* to_string(FallbackReason reason) {
    switch (reason) {
        case FallbackReason::none:
            return "none";
        case FallbackReason::no_hits:
            return "no_hits";
        case FallbackReason::disconnected:
            return "disconnected";
    }
    return "unknown";
}

void SegmentCounter::add(SegmentKey key, Q16Weight w) {
    seen_.insert(key);
    if (w.raw == 0) {
        return;  // keep the table free of zero accumulators
    }
    accum_add(table_[key], w);
}

void SegmentCounter::merge(const SegmentCounter& other) {
    for (const auto& [key, acc] : other.table_) {
        Q16Accum& dst = table_[key];
        if (acc.raw > std::numeric_limits<std::uint64_t>::max() - dst.raw) {
            throw std::overflow_error("segment accumulator overflow in merge");
        }
        dst.raw += acc.raw;
    }
    seen_.insert(other.seen_.begin(), other.seen_.end());
}

std::size_t SegmentCounter::published_count(std::uint32_t k) const {
    std::size_t count = 0;
    for (const auto& [key, acc] : table_) {
        (void)key;
        if (meets_threshold(acc, k)) {
            ++count;
        }
    }
    return count;
}

std::vector<RecordPair> pair_records(const RoadGraph& graph,
                                     const std::vector<LocationRecord>& records) {
    std::vector<RecordPair> pairs;
    for (const auto& [user, seq] : user_node_sequences(graph, records)) {
        for (std::size_t i = 1; i < seq.size(); ++i) {
            pairs.push_back({user, seq[i - 1], seq[i]});
        }
    }
    return pairs;
}

SelectionReport process_record_pair(const RoadGraph& graph, const HistoryLog& log,
                                    SegmentCounter& counter, const RecordPair& pair,
                                    std::uint32_t delta_h, bool hop_filter) {
    SelectionReport report;
    report.pair = pair;

    const auto sp = dijkstra(graph, pair.s, pair.e);
    HopLimit budget;  // unlimited unless the filter applies and a baseline exists
    if (hop_filter && sp) {
        budget = static_cast<std::uint32_t>(sp->hops()) + delta_h;
    }

    const HistoryHit hit = history_search(log, pair.s, pair.e, budget);
    if (hit.hit_count() >= 1) {
        report.used_history = true;
        report.hits = hit.hit_count();
        const Q16Weight w = reciprocal_weight(hit.hit_count());
        for (const auto& path : hit.paths) {
            for (std::size_t i = 1; i < path.size(); ++i) {
                counter.add(make_segment(path[i - 1], path[i]), w);
            }
        }
    } else if (sp) {
        report.fallback = FallbackReason::no_hits;
        for (std::size_t i = 1; i < sp->nodes.size(); ++i) {
            counter.add(make_segment(sp->nodes[i - 1], sp->nodes[i]), unit_weight());
        }
    } else {
        report.fallback = FallbackReason::disconnected;
    }
    return report;
}

std::vector<PublishedSegment> publish(const SegmentCounter& counter, std::uint32_t k) {
    std::vector<PublishedSegment> published;
    for (const auto& [key, acc] : counter.table()) {
        if (meets_threshold(acc, k)) {
            published.push_back({key, acc.to_double()});
        }
    }
    return published;  // map iteration order is already key order
}

PipelineOutput run_pipeline(const RoadGraph& graph, const HistoryLog& log,
                            const std::vector<LocationRecord>& records,
                            const PipelineOptions& options) {
    const std::vector<RecordPair> pairs = pair_records(graph, records);

    PipelineOutput output;
    output.options = options;
    output.reports.resize(pairs.size());

    const unsigned threads = std::max(1u, options.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            output.reports[i] = process_record_pair(graph, log, output.counter, pairs[i],
                                                    options.delta_h, options.hop_filter);
        }
    } else {
        // Work-stealing over pair indices. Each worker accumulates into its
        // own counter; the final merge is order-independent because the
        // accumulators are plain integer sums.
        std::vector<SegmentCounter> partial(threads);
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pairs.size()) {
                        break;
                    }
                    output.reports[i] = process_record_pair(graph, log, partial[t], pairs[i],
                                                            options.delta_h, options.hop_filter);
                }
            });
        }
        for (std::thread& worker : workers) {
            worker.join();
        }
        for (const SegmentCounter& counter : partial) {
            output.counter.merge(counter);
        }
    }

    output.published = publish(output.counter, options.k);
    return output;
}

void write_published_csv(const std::vector<PublishedSegment>& published,
                         const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write published CSV: " + file.string());
    }
    out << "node_a,node_b,count\n";
    for (const auto& [key, count] : published) {
        out << key.a << ',' << key.b << ',' << detail::format_fixed(count, 5) << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing published CSV: " + file.string());
    }
}

void write_selection_csv(const std::vector<SelectionReport>& reports,
                         const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write selection CSV: " + file.string());
    }
    out << "user,s,e,used_history,h,fallback_reason\n";
    for (const SelectionReport& r : reports) {
        out << r.pair.user << ',' << r.pair.s << ',' << r.pair.e << ','
            << (r.used_history ? 1 : 0) << ',' << r.hits << ',' << to_string(r.fallback)
            << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing selection CSV: " + file.string());
    }
}

void write_published_geojson(const std::vector<PublishedSegment>& published,
                             const RoadGraph& graph, const std::filesystem::path& file) {
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (const auto& [key, count] : published) {
        const GeoPoint& a = graph.coord(key.a);
        const GeoPoint& b = graph.coord(key.b);
        nlohmann::ordered_json feature{
            {"type", "Feature"},
            {"geometry",
             {{"type", "LineString"},
              {"coordinates", {{a.lon, a.lat}, {b.lon, b.lat}}}}},
            {"properties", {{"node_a", key.a}, {"node_b", key.b}, {"count", count}}},
        };
        features.push_back(std::move(feature));
    }
    nlohmann::ordered_json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};

    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write GeoJSON: " + file.string());
    }
    out << doc.dump(2) << '\n';
    if (!out.flush()) {
        throw IoError("failed writing GeoJSON: " + file.string());
    }
}

}  // namespace trajk
