#include "trajk/records.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>

#include "text_util.hpp"
#include "trajk/errors.hpp"

namespace trajk {

namespace {
constexpr const char* kHeader = "user_id,lat,lon,ts";
}

std::vector<LocationRecord> load_records(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open records file: " + file.string());
    }

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<LocationRecord> records;

    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != kHeader) {
                throw ParseError(file.string() + ":1: expected header '" + kHeader + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != 4) {
            throw ParseError(file.string() + ":" + std::to_string(line_no) +
                             ": expected user_id,lat,lon,ts");
        }
        LocationRecord rec;
        if (!detail::parse_int(fields[0], rec.user) ||
            !detail::parse_double(fields[1], rec.point.lat) ||
            !detail::parse_double(fields[2], rec.point.lon) ||
            !detail::parse_int(fields[3], rec.ts)) {
            throw ParseError(file.string() + ":" + std::to_string(line_no) +
                             ": malformed record row");
        }
        if (!(rec.point.lat >= -90.0 && rec.point.lat <= 90.0) ||
            !(rec.point.lon >= -180.0 && rec.point.lon <= 180.0)) {
            throw ParseError(file.string() + ":" + std::to_string(line_no) +
                             ": coordinates out of range");
        }
        records.push_back(rec);
    }
    if (!header_seen) {
        throw ParseError(file.string() + ": empty records file (header required)");
    }
    return records;
}

void save_records(const std::vector<LocationRecord>& records,
                  const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write records file: " + file.string());
    }
    out << kHeader << '\n';
    for (const LocationRecord& rec : records) {
        out << rec.user << ',' << detail::format_double(rec.point.lat) << ','
            << detail::format_double(rec.point.lon) << ',' << rec.ts << '\n';
    }
    if (!out.flush()) {
        throw IoError("failed writing records file: " + file.string());
    }
}

std::vector<std::pair<std::uint32_t, std::vector<NodeId>>> user_node_sequences(
    const RoadGraph& graph, const std::vector<LocationRecord>& records) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable so records sharing a timestamp keep their input order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (records[a].user != records[b].user) {
            return records[a].user < records[b].user;
        }
        return records[a].ts < records[b].ts;
    });

    std::vector<std::pair<std::uint32_t, std::vector<NodeId>>> result;
    for (const std::size_t idx : order) {
        const LocationRecord& rec = records[idx];
        const NodeId node = graph.nearest_node(rec.point);
        if (result.empty() || result.back().first != rec.user) {
            result.push_back({rec.user, {node}});
        } else if (result.back().second.back() != node) {
            result.back().second.push_back(node);
        }
    }
    return result;
}

}  // namespace trajk
