#include "trajk/history.hpp"

#include <array>
#include <cstddef>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "trajk/errors.hpp"
#include "trajk/shortest_path.hpp"

namespace trajk {

std::size_t HistoryLog::run_count() const {
    std::set<RunId> runs;
    for (const HistoryEntry& e : entries_) {
        runs.insert(e.run);
    }
    return runs.size();
}

bool HistoryLog::runs_contiguous() const {
    std::set<RunId> closed;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0 && entries_[i].run != entries_[i - 1].run) {
            closed.insert(entries_[i - 1].run);
        }
        if (closed.count(entries_[i].run)) {
            return false;
        }
    }
    return true;
}

HistoryLog build_history_log(const RoadGraph& graph, const std::vector<LocationRecord>& raw) {
    std::vector<HistoryEntry> entries;
    RunId next_run = 0;

    const auto flush = [&](std::vector<NodeId>& run_nodes) {
        if (run_nodes.empty()) {
            return;
        }
        for (const NodeId node : run_nodes) {
            entries.push_back({node, next_run});
        }
        ++next_run;
        run_nodes.clear();
    };

    for (const auto& [user, seq] : user_node_sequences(graph, raw)) {
        (void)user;
        std::vector<NodeId> run_nodes{seq.front()};
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const auto path = dijkstra(graph, seq[i - 1], seq[i]);
            if (!path) {
                // Connectivity break: close the run so the scan can never
                // walk across a gap that was never traveled.
                flush(run_nodes);
                run_nodes.push_back(seq[i]);
                continue;
            }
            run_nodes.insert(run_nodes.end(), path->nodes.begin() + 1, path->nodes.end());
        }
        flush(run_nodes);
    }
    return HistoryLog(std::move(entries));
}

HistoryHit history_search(const HistoryLog& log, NodeId n_s, NodeId n_e, HopLimit max_hop,
                          SearchStats* stats) {
    HistoryHit hit;
    const auto& entries = log.entries();
    std::uint64_t visited = 0;

    for (std::size_t i = 0; i < entries.size(); ++i) {
        ++visited;
        if (entries[i].node != n_s) {
            continue;
        }
        const RunId run = entries[i].run;
        std::vector<NodeId> cur{n_s};
        std::uint32_t c = 0;
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            ++visited;
            if (entries[j].run != run || entries[j].node == n_s) {
                break;
            }
            if (max_hop && c >= *max_hop) {
                break;
            }
            ++c;
            cur.push_back(entries[j].node);
            // The endpoint check runs after the append, so a walk that
            // reaches n_e exactly on the hop boundary still counts.
            if (entries[j].node == n_e) {
                hit.paths.push_back(cur);
                break;
            }
        }
    }
    if (stats) {
        stats->entries_visited = visited;
    }
    return hit;
}

HopLimit max_hop_for(const RoadGraph& graph, NodeId n_s, NodeId n_e, std::uint32_t delta_h,
                     bool filter_enabled) {
    if (!filter_enabled) {
        return std::nullopt;
    }
    const auto sp = shortest_hop_count(graph, n_s, n_e);
    if (!sp) {
        return std::nullopt;  // no baseline exists for a disconnected pair
    }
    return *sp + delta_h;
}

namespace {

constexpr std::array<char, 4> kMagic{'T', 'H', 'L', '1'};

void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
    buf.push_back(static_cast<char>((v >> 16) & 0xFF));
    buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    put_u32(buf, static_cast<std::uint32_t>(v & 0xFFFFFFFFull));
    put_u32(buf, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(const std::string& buf, std::size_t pos) {
    const auto byte = [&](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]));
    };
    return byte(0) | (byte(1) << 8) | (byte(2) << 16) | (byte(3) << 24);
}

std::uint64_t get_u64(const std::string& buf, std::size_t pos) {
    return static_cast<std::uint64_t>(get_u32(buf, pos)) |
           (static_cast<std::uint64_t>(get_u32(buf, pos + 4)) << 32);
}

}  // namespace

void save_history_log(const HistoryLog& log, const std::filesystem::path& file) {
    std::string buf;
    buf.reserve(12 + log.size() * 8);
    buf.append(kMagic.data(), kMagic.size());
    put_u64(buf, log.size());
    for (const HistoryEntry& e : log.entries()) {
        put_u32(buf, e.node);
        put_u32(buf, e.run);
    }

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write history log: " + file.string());
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out.flush()) {
        throw IoError("failed writing history log: " + file.string());
    }
}

HistoryLog load_history_log(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError("cannot open history log: " + file.string());
    }
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 12 || std::string_view(buf.data(), 4) != std::string_view(kMagic.data(), 4)) {
        throw ParseError(file.string() + ": not a history log (bad magic)");
    }
    const std::uint64_t count = get_u64(buf, 4);
    if (buf.size() != 12 + count * 8) {
        throw ParseError(file.string() + ": truncated or oversized history log");
    }

    std::vector<HistoryEntry> entries;
    entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t pos = 12 + static_cast<std::size_t>(i) * 8;
        entries.push_back({get_u32(buf, pos), get_u32(buf, pos + 4)});
    }

    HistoryLog log(std::move(entries));
    if (!log.runs_contiguous()) {
        throw ParseError(file.string() + ": run ids are not contiguous");
    }
    return log;
}

void export_history_csv(const HistoryLog& log, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write history CSV: " + file.string());
    }
    out << "node,run\n";
    for (const HistoryEntry& e : log.entries()) {
        out << e.node << ',' << e.run << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing history CSV: " + file.string());
    }
}

HistoryLog resize_history_log(const HistoryLog& log, std::uint64_t target_entries) {
    if (target_entries <= log.size()) {
        std::vector<HistoryEntry> entries(log.entries().begin(),
                                          log.entries().begin() +
                                              static_cast<std::ptrdiff_t>(target_entries));
        return HistoryLog(std::move(entries));
    }
    if (log.empty()) {
        throw std::domain_error("cannot extend an empty history log");
    }

    RunId max_run = 0;
    for (const HistoryEntry& e : log.entries()) {
        max_run = std::max(max_run, e.run);
    }
    const RunId stride = max_run + 1;

    std::vector<HistoryEntry> entries(log.entries());
    entries.reserve(target_entries);
    RunId offset = stride;
    while (entries.size() < target_entries) {
        for (const HistoryEntry& e : log.entries()) {
            entries.push_back({e.node, e.run + offset});
            if (entries.size() == target_entries) {
                break;
            }
        }
        offset += stride;
    }
    return HistoryLog(std::move(entries));
}

}  // namespace trajk
