#include <algorithm>
#include <functional>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mobicomm/error.hpp"
#include "mobicomm/pipeline.hpp"
#include "mobicomm/static_metrics.hpp"
#include "mobicomm/synthetic.hpp"
#include "mobicomm/temporal_metrics.hpp"
#include "mobicomm/text.hpp"

using namespace mobicomm;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4, kInternal = 70 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return kConfig;
        case ErrorKind::Data:
        case ErrorKind::Domain: return kData;
        case ErrorKind::Numerical: return kNumerical;
        case ErrorKind::Internal: return kInternal;
    }
    return kInternal;
}

struct GlobalFlags {
    std::string config;
    std::string output_dir;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string log_level = "info";
};

struct Flags {
    std::vector<std::string> inputs;
    std::string input_kind;
    std::string delimiter;
    Seconds gap = 0, flicker = 0, merge_gap = 0;
    std::string mode;
    double threshold = 0;
    Seconds origin = 0, span = 0;
    std::size_t dense_limit = 0, probes = 0;
    std::vector<std::string> windows;
    double gamma_factor = 0;
    bool trajectory = false;
    bool no_baselines = false;

    std::string model;
    std::size_t nodes = 0, m = 0, k = 0;
    double p = 0;
    double days = 0;
};

/// Flag values override the config file only when they were given.
class Overrides {
public:
    void track(CLI::Option* opt, std::function<void(PipelineConfig&)> apply) { items_.push_back({opt, std::move(apply)}); }

    void apply(PipelineConfig& config) const {
        for (const auto& [opt, fn] : items_) {
            if (opt->count() > 0) fn(config);
        }
    }

private:
    std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> items_;
};

std::vector<GraphMode> parse_modes(const std::string& text) {
    if (text == "both") return {GraphMode::Weighted, GraphMode::Unweighted};
    return {parse_graph_mode(text)};
}

void log_manifest(const RunManifest& manifest) {
    for (const auto& [name, count] : manifest.counts) spdlog::info("{} = {}", name, count);
    for (const auto& [stage, secs] : manifest.stage_seconds) spdlog::debug("stage {} took {:.3f}s", stage, secs);
    for (const auto& a : manifest.artifacts) spdlog::info("wrote {} ({} bytes)", a.path, a.bytes);
}

bool is_graph_header(const std::string& path) { return fs::path(path).extension() == ".json"; }

ContactGraph load_graph(const fs::path& header) {
    auto edges = header;
    edges.replace_extension(".csv");
    return parse_graph(read_file(header), read_file(edges));
}

void write_graph(const fs::path& dir, const std::string& stem, const ContactGraph& g) {
    const auto files = format_graph(g);
    write_file(dir / (stem + ".csv"), files.edges_csv);
    write_file(dir / (stem + ".json"), files.header_json);
    spdlog::info("wrote {} ({} nodes, {} edges)", (dir / (stem + ".csv")).string(), g.node_count(), g.edge_count());
}

/// static-metrics on graph files written by `graph` or `synth`.
void static_from_graphs(const PipelineConfig& config, const std::vector<std::string>& headers) {
    StaticOptions opts;
    opts.dense_limit = config.static_dense_limit;
    opts.probes = config.probes;
    opts.seed = config.seed;
    opts.threads = config.threads;
    for (const auto& h : headers) {
        const auto graph = load_graph(h);
        const auto report = total_communicability(graph, opts);
        const auto stem = fs::path(h).stem().string();
        write_file(config.output_dir / ("static_" + stem + ".json"), format_static_report_json(report));
        write_file(config.output_dir / ("static_nodes_" + stem + ".csv"), format_static_nodes_csv(graph, report));
        spdlog::info("{}: C(A) = {}, per node {}, per edge {}", stem, format_double(report.total),
                     format_double(report.per_node), format_double(report.per_edge));
    }
}

void compare_graphs(const PipelineConfig& config, const std::vector<std::string>& headers) {
    std::vector<LabeledGraph> graphs;
    for (const auto& h : headers) graphs.push_back({fs::path(h).stem().string(), load_graph(h)});
    if (config.baselines && !graphs.empty()) {
        const auto n = graphs.front().graph.node_count();
        graphs.push_back({"barabasi_albert",
                          barabasi_albert({SyntheticModel::PreferentialAttachment, n, config.baseline_m, 2, 0, config.seed})});
        graphs.push_back({"watts_strogatz",
                          watts_strogatz({SyntheticModel::SmallWorld, n, 2, config.baseline_k, config.baseline_p, config.seed})});
    }
    StaticOptions opts;
    opts.dense_limit = config.static_dense_limit;
    opts.probes = config.probes;
    opts.seed = config.seed;
    opts.threads = config.threads;
    const auto rows = compare_networks(graphs, opts);
    write_file(config.output_dir / "comparison.csv", format_comparison_csv(rows));
    write_file(config.output_dir / "comparison.json", format_comparison_json(rows));
    for (const auto& r : rows) spdlog::info("{}: per node {}, per edge {}", r.label, format_double(r.per_node), format_double(r.per_edge));
}

void run_synth(const PipelineConfig& config, const Flags& f) {
    const auto& model = f.model;
    if (model == "contact-trace") {
        ContactTraceSpec spec;
        if (f.nodes) spec.nodes = f.nodes;
        if (f.days > 0) spec.days = f.days;
        spec.seed = config.seed;
        const auto events = poisson_contact_trace(spec);
        write_file(config.output_dir / "encounters.csv", format_encounters_csv(events));
        spdlog::info("wrote {} encounters", events.size());
        return;
    }
    if (model == "session-log") {
        AssociationLogSpec spec;
        if (f.nodes) spec.nodes = f.nodes;
        if (f.days > 0) spec.days = f.days;
        spec.seed = config.seed;
        const auto records = synthetic_association_log(spec);
        write_file(config.output_dir / "sessions.csv", format_session_log(records));
        spdlog::info("wrote {} session records", records.size());
        return;
    }
    SyntheticSpec spec;
    spec.nodes = f.nodes;
    spec.m = f.m;
    spec.k = f.k;
    spec.p = f.p;
    spec.seed = config.seed;
    if (model == "ba" || model == "barabasi-albert") {
        spec.model = SyntheticModel::PreferentialAttachment;
        write_graph(config.output_dir, "graph_barabasi_albert", barabasi_albert(spec));
    } else if (model == "ws" || model == "watts-strogatz") {
        spec.model = SyntheticModel::SmallWorld;
        write_graph(config.output_dir, "graph_watts_strogatz", watts_strogatz(spec));
    } else {
        throw ConfigError("unknown model '" + model + "' (expected ba, ws, contact-trace or session-log)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact-trace communicability analysis"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    GlobalFlags g;
    Flags f;
    Overrides overrides;

    app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
    overrides.track(app.add_option("--output-dir", g.output_dir, "Directory for artifacts"),
                    [&](PipelineConfig& c) { c.output_dir = g.output_dir; });
    overrides.track(app.add_option("--threads", g.threads, "Worker threads"), [&](PipelineConfig& c) { c.threads = g.threads; });
    overrides.track(app.add_option("--seed", g.seed, "Random seed"), [&](PipelineConfig& c) { c.seed = g.seed; });
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

    auto add_inputs = [&](CLI::App* sub) {
        overrides.track(sub->add_option("-i,--input", f.inputs, "Input file (repeatable)"),
                        [&](PipelineConfig& c) { c.inputs.assign(f.inputs.begin(), f.inputs.end()); });
        overrides.track(sub->add_option("--input-kind", f.input_kind, "auto, session-log, intervals, encounters"),
                        [&](PipelineConfig& c) { c.input_kind = parse_input_kind(f.input_kind); });
    };
    auto add_ingest = [&](CLI::App* sub) {
        overrides.track(sub->add_option("--delimiter", f.delimiter, "Session log field delimiter"),
                        [&](PipelineConfig& c) {
                            if (f.delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
                            c.format.delimiter = f.delimiter[0];
                        });
        overrides.track(sub->add_option("--gap-seconds", f.gap, "Same-AP merge gap"),
                        [&](PipelineConfig& c) { c.smoothing.gap = f.gap; });
        overrides.track(sub->add_option("--flicker-seconds", f.flicker, "Longest visit treated as a flicker"),
                        [&](PipelineConfig& c) { c.smoothing.flicker = f.flicker; });
    };
    auto add_encounters = [&](CLI::App* sub) {
        overrides.track(sub->add_option("--merge-gap-seconds", f.merge_gap, "Join a pair's encounters closer than this"),
                        [&](PipelineConfig& c) { c.merge_gap = f.merge_gap; });
    };
    auto add_graph = [&](CLI::App* sub) {
        overrides.track(sub->add_option("--mode", f.mode, "weighted, unweighted or both"),
                        [&](PipelineConfig& c) { c.modes = parse_modes(f.mode); });
        overrides.track(sub->add_option("--threshold", f.threshold, "Social weight threshold"),
                        [&](PipelineConfig& c) { c.threshold = f.threshold; });
        overrides.track(sub->add_option("--observation-span", f.span, "Observation span T in seconds"),
                        [&](PipelineConfig& c) { c.observation_span = f.span; });
        overrides.track(sub->add_option("--origin", f.origin, "Observation start in epoch seconds"),
                        [&](PipelineConfig& c) { c.origin = f.origin; });
    };
    auto add_static = [&](CLI::App* sub) {
        overrides.track(sub->add_option("--dense-limit", f.dense_limit, "Largest N for the dense path"),
                        [&](PipelineConfig& c) { c.static_dense_limit = f.dense_limit; });
        overrides.track(sub->add_option("--probes", f.probes, "Probe vectors for diagonal estimation"),
                        [&](PipelineConfig& c) { c.probes = f.probes; });
    };
    auto add_temporal = [&](CLI::App* sub, bool with_dense_limit) {
        overrides.track(sub->add_option("--window", f.windows, "Snapshot window, e.g. 3600, 1h, 1d, 1w, 1mo (repeatable)"),
                        [&](PipelineConfig& c) {
                            c.windows.clear();
                            for (const auto& w : f.windows) c.windows.push_back(parse_duration(w));
                        });
        overrides.track(sub->add_option("--gamma-factor", f.gamma_factor, "gamma = factor / max spectral radius"),
                        [&](PipelineConfig& c) { c.gamma_factor = f.gamma_factor; });
        overrides.track(sub->add_flag("--trajectory", f.trajectory, "Also write C_t after each snapshot"),
                        [&](PipelineConfig& c) { c.trajectory = f.trajectory; });
        if (with_dense_limit) {
            overrides.track(sub->add_option("--dense-limit", f.dense_limit, "Largest N that accumulates the full matrix"),
                            [&](PipelineConfig& c) { c.temporal_dense_limit = f.dense_limit; });
        }
    };

    auto* ingest = app.add_subcommand("ingest", "Parse session logs into smoothed association intervals");
    add_inputs(ingest);
    add_ingest(ingest);

    auto* encounters = app.add_subcommand("encounters", "Extract encounter events");
    add_inputs(encounters);
    add_ingest(encounters);
    add_encounters(encounters);

    auto* graph = app.add_subcommand("graph", "Build contact graphs and degree/weight distributions");
    add_inputs(graph);
    add_ingest(graph);
    add_encounters(graph);
    add_graph(graph);

    auto* stat = app.add_subcommand("static-metrics", "Sub-graph centrality and communicability");
    add_inputs(stat);
    add_ingest(stat);
    add_encounters(stat);
    add_graph(stat);
    add_static(stat);

    auto* temporal = app.add_subcommand("temporal-metrics", "Dynamic communicability over snapshot windows");
    add_inputs(temporal);
    add_ingest(temporal);
    add_encounters(temporal);
    add_graph(temporal);
    add_temporal(temporal, true);

    auto* compare = app.add_subcommand("compare", "Compare observed graphs with synthetic baselines");
    add_inputs(compare);
    add_ingest(compare);
    add_encounters(compare);
    add_graph(compare);
    add_static(compare);
    overrides.track(compare->add_flag("--no-baselines", f.no_baselines, "Skip the synthetic baseline rows"),
                    [&](PipelineConfig& c) { c.baselines = !f.no_baselines; });

    auto* synth = app.add_subcommand("synth", "Generate synthetic graphs or traces");
    synth->add_option("--model", f.model, "ba, ws, contact-trace or session-log")->required();
    synth->add_option("--nodes", f.nodes, "Number of nodes")->required();
    synth->add_option("--m", f.m, "Edges per arriving node (ba)")->default_val(2);
    synth->add_option("--k", f.k, "Ring degree (ws)")->default_val(2);
    synth->add_option("--p", f.p, "Rewiring probability (ws)")->default_val(0.0);
    synth->add_option("--days", f.days, "Trace length in days (contact-trace, session-log)");

    auto* run = app.add_subcommand("run", "Run the full pipeline");
    add_inputs(run);
    add_ingest(run);
    add_encounters(run);
    add_graph(run);
    overrides.track(run->add_option("--static-dense-limit", f.dense_limit, "Largest N for the dense static path"),
                    [&](PipelineConfig& c) { c.static_dense_limit = f.dense_limit; });
    overrides.track(run->add_option("--probes", f.probes, "Probe vectors for diagonal estimation"),
                    [&](PipelineConfig& c) { c.probes = f.probes; });
    add_temporal(run, false);
    overrides.track(run->add_flag("--no-baselines", f.no_baselines, "Skip the synthetic baseline rows"),
                    [&](PipelineConfig& c) { c.baselines = !f.no_baselines; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    auto logger = spdlog::stderr_color_mt("mobicomm");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    try {
        PipelineConfig config;
        if (!g.config.empty()) config = load_config_file(g.config);
        overrides.apply(config);

        if (synth->parsed()) {
            run_synth(config, f);
            return kOk;
        }

        const bool graph_inputs =
            !config.inputs.empty() && std::all_of(config.inputs.begin(), config.inputs.end(),
                                                  [](const fs::path& p) { return is_graph_header(p.string()); });
        if (graph_inputs && (stat->parsed() || compare->parsed())) {
            for (const auto& p : config.inputs) {
                if (!fs::exists(p)) throw ConfigError("input path does not exist: " + p.string());
            }
            std::vector<std::string> headers;
            for (const auto& p : config.inputs) headers.push_back(p.string());
            if (stat->parsed()) static_from_graphs(config, headers);
            else compare_graphs(config, headers);
            return kOk;
        }

        if (ingest->parsed()) config.stages = {Stage::Ingest};
        else if (encounters->parsed()) config.stages = {Stage::Encounters};
        else if (graph->parsed()) config.stages = {Stage::Graph};
        else if (stat->parsed()) config.stages = {Stage::Static};
        else if (temporal->parsed()) config.stages = {Stage::Temporal};
        else if (compare->parsed()) config.stages = {Stage::Compare};

        const auto violations = validate_config(config);
        if (!violations.empty()) {
            for (const auto& v : violations) spdlog::error("config: {}: {}", v.field, v.message);
            return kConfig;
        }
        spdlog::info("output directory {}", config.output_dir.string());
        const auto manifest = run_pipeline(config);
        log_manifest(manifest);
        return kOk;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        spdlog::critical("unexpected failure: {}", e.what());
        return kInternal;
    }
}
