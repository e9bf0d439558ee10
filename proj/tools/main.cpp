#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajk/anonymizer.hpp"
#include "trajk/errors.hpp"
#include "trajk/history.hpp"
#include "trajk/metrics.hpp"
#include "trajk/records.hpp"
#include "trajk/road_graph.hpp"
#include "trajk/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a_digest(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw trajk::IoError("cannot open for digest: " + file.string());
    }
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 0x100000001b3ull;
        }
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::uint32_t> parse_k_list(const std::string& text) {
    std::vector<std::uint32_t> ks;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string field =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!field.empty()) {
            ks.push_back(static_cast<std::uint32_t>(std::stoul(field)));
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    for (std::size_t i = 1; i < ks.size(); ++i) {
        if (ks[i] <= ks[i - 1]) {
            throw trajk::ParseError("k list must be strictly ascending");
        }
    }
    if (ks.empty()) {
        throw trajk::ParseError("k list must not be empty");
    }
    return ks;
}

std::vector<std::uint64_t> parse_size_list(const std::string& text) {
    std::vector<std::uint64_t> sizes;
    std::size_t start = 0;
    while (start <= text.size() && !text.empty()) {
        const std::size_t comma = text.find(',', start);
        const std::string field =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!field.empty()) {
            sizes.push_back(std::stoull(field));
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return sizes;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw trajk::IoError("cannot write: " + file.string());
    }
    out << text;
    if (!out.flush()) {
        throw trajk::IoError("failed writing: " + file.string());
    }
}

struct HistorySource {
    std::string log_file;
    std::string records_file;
    bool none = false;

    void validate() const {
        const int provided = (!log_file.empty() ? 1 : 0) + (!records_file.empty() ? 1 : 0) +
                             (none ? 1 : 0);
        if (provided != 1) {
            throw trajk::ParseError(
                "choose exactly one of --history-log, --history-records, --no-history");
        }
    }

    trajk::HistoryLog load(const trajk::RoadGraph& graph) const {
        validate();
        if (!log_file.empty()) {
            return trajk::load_history_log(log_file);
        }
        if (!records_file.empty()) {
            return trajk::build_history_log(graph, trajk::load_records(records_file));
        }
        return trajk::HistoryLog{};
    }
};

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    trajk::SynthParams params;
    std::string out_dir;
    bool json = false;
};

void run_synth(const SynthArgs& args) {
    const trajk::SynthCity city = trajk::synth_city(args.params);

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw trajk::IoError("cannot create output dir: " + dir.string());
    }

    trajk::save_graph(city.graph, dir / "map.csv");
    trajk::save_records(city.current_records, dir / "current.csv");
    trajk::save_records(city.history_records, dir / "history_records.csv");
    {
        std::string text = "node_a,node_b\n";
        for (const trajk::SegmentKey& key : city.arterial_edges) {
            text += std::to_string(key.a) + ',' + std::to_string(key.b) + '\n';
        }
        write_text(dir / "arterials.csv", text);
    }

    ordered_json manifest{
        {"nodes", city.graph.node_count()},
        {"edges", city.graph.edge_count()},
        {"arterial_edges", city.arterial_edges.size()},
        {"current_records", city.current_records.size()},
        {"history_records", city.history_records.size()},
        {"map_digest", hex64(fnv1a_digest(dir / "map.csv"))},
        {"current_digest", hex64(fnv1a_digest(dir / "current.csv"))},
        {"history_digest", hex64(fnv1a_digest(dir / "history_records.csv"))},
        {"arterials_digest", hex64(fnv1a_digest(dir / "arterials.csv"))},
    };
    if (args.json) {
        std::cout << manifest.dump(2) << '\n';
    } else {
        for (const auto& [key, value] : manifest.items()) {
            std::cout << key << '='
                      << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
        }
    }
}

// ---- build-history --------------------------------------------------------

struct BuildHistoryArgs {
    std::string map_file;
    std::string records_file;
    std::string out_file;
    std::string csv_file;
    bool json = false;
};

void run_build_history(const BuildHistoryArgs& args) {
    const trajk::RoadGraph graph = trajk::load_graph(args.map_file);
    const auto raw = trajk::load_records(args.records_file);
    const trajk::HistoryLog log = trajk::build_history_log(graph, raw);
    trajk::save_history_log(log, args.out_file);
    if (!args.csv_file.empty()) {
        trajk::export_history_csv(log, args.csv_file);
    }

    if (args.json) {
        std::cout << ordered_json{{"entries", log.size()}, {"runs", log.run_count()}}.dump(2)
                  << '\n';
    } else {
        std::cout << "entries=" << log.size() << '\n' << "runs=" << log.run_count() << '\n';
    }
}

// ---- anonymize ------------------------------------------------------------

struct AnonymizeArgs {
    std::string map_file;
    std::string records_file;
    HistorySource history;
    trajk::PipelineOptions options;
    std::string out_dir;
    bool geojson = false;
    bool json = false;
};

std::vector<std::uint32_t> retention_grid(std::uint32_t k) {
    std::set<std::uint32_t> grid = {1, 2, 4, 8, 16, 32, 64};
    grid.insert(k);
    return {grid.begin(), grid.end()};
}

void run_anonymize(const AnonymizeArgs& args) {
    const trajk::RoadGraph graph = trajk::load_graph(args.map_file);
    const auto records = trajk::load_records(args.records_file);
    const trajk::HistoryLog log = args.history.load(graph);

    const trajk::PipelineOutput output =
        trajk::run_pipeline(graph, log, records, args.options);

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw trajk::IoError("cannot create output dir: " + dir.string());
    }

    trajk::write_published_csv(output.published, dir / "published.csv");
    trajk::write_selection_csv(output.reports, dir / "selection.csv");

    const auto ks = retention_grid(args.options.k);
    const auto curve = trajk::retention_curve(output, ks);
    trajk::write_retention_csv(curve, dir / "retention.csv");

    if (args.geojson) {
        trajk::write_published_geojson(output.published, graph, dir / "published.geojson");
    }

    double rate_at_k = 0.0;
    for (const trajk::RetentionReport& report : curve) {
        if (report.k == args.options.k) {
            rate_at_k = report.rate_pct;
        }
    }

    ordered_json summary{
        {"pairs", output.reports.size()},
        {"published", output.published.size()},
        {"k", args.options.k},
        {"retention_pct", rate_at_k},
    };
    if (args.json) {
        ordered_json reports = ordered_json::array();
        for (const trajk::RetentionReport& report : curve) {
            reports.push_back({{"k", report.k},
                               {"published", report.published},
                               {"total", report.total_input},
                               {"rate_pct", report.rate_pct}});
        }
        write_text(dir / "retention.json", ordered_json(reports).dump(2) + "\n");
        std::cout << summary.dump(2) << '\n';
    } else {
        for (const auto& [key, value] : summary.items()) {
            std::cout << key << '=' << value.dump() << '\n';
        }
    }
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::string map_file;
    std::string records_file;
    std::string log_file;
    std::string sizes_text;
    int reps = 3;
    std::string out_file = "bench.csv";
    bool json = false;
};

void run_bench(const BenchArgs& args) {
    const auto sizes = parse_size_list(args.sizes_text);

    std::vector<trajk::BenchRow> rows;
    if (!sizes.empty()) {
        const trajk::RoadGraph graph = trajk::load_graph(args.map_file);
        const auto records = trajk::load_records(args.records_file);
        const trajk::HistoryLog base = trajk::load_history_log(args.log_file);
        const trajk::HwModelParams model_params;

        for (const std::uint64_t size : sizes) {
            const trajk::HistoryLog log = trajk::resize_history_log(base, size);
            rows.push_back({size, "model", trajk::hw_throughput(model_params, size)});
            const auto measured =
                trajk::measure_sw_throughput(graph, log, records, {}, args.reps);
            rows.push_back({size, "measured", measured.median_rate});
        }
    }
    trajk::write_bench_csv(rows, args.out_file);

    if (args.json) {
        ordered_json doc = ordered_json::array();
        for (const trajk::BenchRow& row : rows) {
            doc.push_back({{"history_size", row.history_size},
                           {"source", row.source},
                           {"records_per_sec", row.records_per_sec}});
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "rows=" << rows.size() << '\n';
    }
}

// ---- metrics --------------------------------------------------------------

struct MetricsArgs {
    std::string map_file;
    std::string records_file;
    HistorySource history;
    std::string ks_text = "1,2,4,8,16,32,64";
    std::uint32_t delta_h = 5;
    bool no_hop_filter = false;  // retention only
    std::string out_file;
    bool json = false;
};

void run_metrics_retention(const MetricsArgs& args) {
    const trajk::RoadGraph graph = trajk::load_graph(args.map_file);
    const auto records = trajk::load_records(args.records_file);
    const trajk::HistoryLog log = args.history.load(graph);
    const auto ks = parse_k_list(args.ks_text);

    trajk::PipelineOptions options;
    options.delta_h = args.delta_h;
    options.hop_filter = !args.no_hop_filter;
    const auto output = trajk::run_pipeline(graph, log, records, options);
    const auto curve = trajk::retention_curve(output, ks);
    trajk::write_retention_csv(curve, args.out_file);

    if (args.json) {
        ordered_json doc = ordered_json::array();
        for (const trajk::RetentionReport& report : curve) {
            doc.push_back({{"k", report.k},
                           {"published", report.published},
                           {"total", report.total_input},
                           {"rate_pct", report.rate_pct}});
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "rows=" << curve.size() << '\n';
    }
}

void run_metrics_hop_impact(const MetricsArgs& args) {
    const trajk::RoadGraph graph = trajk::load_graph(args.map_file);
    const auto records = trajk::load_records(args.records_file);
    const trajk::HistoryLog log = args.history.load(graph);
    const auto ks = parse_k_list(args.ks_text);

    trajk::PipelineOptions with;
    with.delta_h = args.delta_h;
    with.hop_filter = true;
    trajk::PipelineOptions without = with;
    without.hop_filter = false;

    const auto filtered = trajk::run_pipeline(graph, log, records, with);
    const auto unfiltered = trajk::run_pipeline(graph, log, records, without);
    const auto deltas = trajk::hop_filter_impact(filtered, unfiltered, ks);
    trajk::write_hop_impact_csv(deltas, args.out_file);

    if (args.json) {
        ordered_json doc = ordered_json::array();
        for (const trajk::HopFilterDelta& delta : deltas) {
            doc.push_back({{"k", delta.k}, {"delta_pct", delta.delta_pct}});
        }
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << "rows=" << deltas.size() << '\n';
    }
}

void add_history_flags(CLI::App* cmd, HistorySource& source) {
    cmd->add_option("--history-log", source.log_file, "prebuilt binary history log");
    cmd->add_option("--history-records", source.records_file,
                    "raw prior-period records to build the history from");
    cmd->add_flag("--no-history", source.none, "run the shortest-path-only baseline");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"history-aware segment k-anonymization toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic city and traffic");
    synth_cmd->add_option("--seed", synth.params.seed, "RNG seed");
    synth_cmd->add_option("--grid", synth.params.grid, "lattice size (grid x grid nodes)");
    synth_cmd->add_option("--arterial-fraction", synth.params.arterial_fraction,
                          "fraction of grid lines promoted to arterials");
    synth_cmd->add_option("--users", synth.params.users, "trips per period");
    synth_cmd->add_option("--samples", synth.params.samples_per_user,
                          "samples per current-period trip");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_flag("--json", synth.json, "JSON manifest");

    BuildHistoryArgs build;
    auto* build_cmd =
        app.add_subcommand("build-history", "build the history log from raw records");
    build_cmd->add_option("--map", build.map_file, "map CSV")->required();
    build_cmd->add_option("--records", build.records_file, "raw records CSV")->required();
    build_cmd->add_option("--out", build.out_file, "output log file")->required();
    build_cmd->add_option("--csv", build.csv_file, "also export a node,run debug CSV");
    build_cmd->add_flag("--json", build.json, "JSON summary");

    AnonymizeArgs anon;
    auto* anon_cmd = app.add_subcommand("anonymize", "run the anonymization pipeline");
    anon_cmd->add_option("--map", anon.map_file, "map CSV")->required();
    anon_cmd->add_option("--records", anon.records_file, "current-period records CSV")
        ->required();
    add_history_flags(anon_cmd, anon.history);
    anon_cmd->add_option("--k", anon.options.k, "anonymity threshold");
    anon_cmd->add_option("--delta-h", anon.options.delta_h, "hop slack over the shortest path");
    bool no_hop_filter = false;
    anon_cmd->add_flag("--no-hop-filter", no_hop_filter, "disable the hop-count filter");
    anon_cmd->add_option("--parallel", anon.options.threads, "worker thread count");
    anon_cmd->add_option("--out", anon.out_dir, "output directory")->required();
    anon_cmd->add_flag("--geojson", anon.geojson, "also write published.geojson");
    anon_cmd->add_flag("--json", anon.json, "JSON summary and report mirrors");

    BenchArgs bench;
    auto* bench_cmd =
        app.add_subcommand("bench", "model and measure throughput across history sizes");
    bench_cmd->add_option("--map", bench.map_file, "map CSV")->required();
    bench_cmd->add_option("--records", bench.records_file, "records CSV")->required();
    bench_cmd->add_option("--history-log", bench.log_file, "base history log")->required();
    bench_cmd->add_option("--sizes", bench.sizes_text,
                          "comma-separated history sizes (empty: header-only CSV)");
    bench_cmd->add_option("--reps", bench.reps, "measurement repetitions per size");
    bench_cmd->add_option("--out", bench.out_file, "output CSV");
    bench_cmd->add_flag("--json", bench.json, "JSON rows to stdout");

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "compute evaluation reports");
    metrics_cmd->require_subcommand(1);
    auto* retention_cmd =
        metrics_cmd->add_subcommand("retention", "retention curve across k values");
    auto* impact_cmd =
        metrics_cmd->add_subcommand("hop-impact", "hop-filter impact across k values");
    for (CLI::App* cmd : {retention_cmd, impact_cmd}) {
        cmd->add_option("--map", metrics.map_file, "map CSV")->required();
        cmd->add_option("--records", metrics.records_file, "records CSV")->required();
        add_history_flags(cmd, metrics.history);
        cmd->add_option("--ks", metrics.ks_text, "comma-separated ascending k values");
        cmd->add_option("--delta-h", metrics.delta_h, "hop slack");
        cmd->add_option("--out", metrics.out_file, "output CSV")->required();
        cmd->add_flag("--json", metrics.json, "JSON rows to stdout");
    }
    retention_cmd->add_flag("--no-hop-filter", metrics.no_hop_filter,
                            "disable the hop-count filter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*synth_cmd) {
            run_synth(synth);
        } else if (*build_cmd) {
            run_build_history(build);
        } else if (*anon_cmd) {
            anon.options.hop_filter = !no_hop_filter;
            if (anon.options.k < 1) {
                throw trajk::ParseError("--k must be at least 1");
            }
            run_anonymize(anon);
        } else if (*bench_cmd) {
            run_bench(bench);
        } else if (*metrics_cmd) {
            if (*retention_cmd) {
                run_metrics_retention(metrics);
            } else {
                run_metrics_hop_impact(metrics);
            }
        }
        return 0;
    } catch (const trajk::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const trajk::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
