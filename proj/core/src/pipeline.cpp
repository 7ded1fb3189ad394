#include "mobicomm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "mobicomm/encounter.hpp"
#include "mobicomm/error.hpp"
#include "mobicomm/synthetic.hpp"
#include "mobicomm/text.hpp"

#ifndef MOBICOMM_VERSION
#define MOBICOMM_VERSION "0.0.0"
#endif

namespace mobicomm {

const char* tool_version() { return MOBICOMM_VERSION; }

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Ingest, "ingest"},   {Stage::Encounters, "encounters"}, {Stage::Graph, "graph"},
    {Stage::Static, "static"},   {Stage::Temporal, "temporal"},     {Stage::Compare, "compare"},
};

constexpr std::pair<InputKind, std::string_view> kInputKindNames[] = {
    {InputKind::Auto, "auto"},
    {InputKind::SessionLog, "session-log"},
    {InputKind::Intervals, "intervals"},
    {InputKind::Encounters, "encounters"},
};

InputKind detect_kind(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        if (t.starts_with("UserA")) return InputKind::Encounters;
        if (t.starts_with("node_id,ap_id,start,end")) return InputKind::Intervals;
        return InputKind::SessionLog;
    }
    return InputKind::SessionLog;
}

InputKind resolve_kind(const PipelineConfig& config) {
    if (config.input_kind != InputKind::Auto) return config.input_kind;
    InputKind kind = detect_kind(config.inputs.front());
    for (std::size_t i = 1; i < config.inputs.size(); ++i) {
        if (detect_kind(config.inputs[i]) != kind) throw ConfigError("inputs mix different file kinds");
    }
    return kind;
}

int stage_rank(InputKind kind) {
    switch (kind) {
        case InputKind::Intervals: return 1;   // ingest already done
        case InputKind::Encounters: return 2;  // encounters already done
        default: return 0;
    }
}

}  // namespace

std::string_view to_string(Stage stage) {
    for (const auto& [s, name] : kStageNames) {
        if (s == stage) return name;
    }
    return "unknown";
}

Stage parse_stage(std::string_view text) {
    for (const auto& [s, name] : kStageNames) {
        if (name == text) return s;
    }
    throw ConfigError(fmt::format("unknown stage '{}'", text));
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::Ingest, Stage::Encounters, Stage::Graph,
                                           Stage::Static, Stage::Temporal,   Stage::Compare};
    return stages;
}

std::string_view to_string(InputKind kind) {
    for (const auto& [k, name] : kInputKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

InputKind parse_input_kind(std::string_view text) {
    for (const auto& [k, name] : kInputKindNames) {
        if (name == text) return k;
    }
    throw ConfigError(fmt::format("unknown input kind '{}'", text));
}

std::vector<ConfigViolation> validate_config(const PipelineConfig& config) {
    std::vector<ConfigViolation> v;
    auto add = [&](std::string field, std::string message) { v.push_back({std::move(field), std::move(message)}); };

    if (config.stages.empty()) add("stages", "at least one stage must be requested");
    if (config.inputs.empty()) add("inputs", "at least one input path is required");
    bool inputs_ok = !config.inputs.empty();
    for (const auto& p : config.inputs) {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(p, ec)) {
            add("inputs", fmt::format("input path does not exist: {}", p.string()));
            inputs_ok = false;
        }
    }
    if (inputs_ok) {
        try {
            const auto kind = resolve_kind(config);
            const int rank = stage_rank(kind);
            if (rank >= 1 && config.stages.count(Stage::Ingest)) {
                add("stages", fmt::format("stage ingest needs a session log, inputs are {}", to_string(kind)));
            }
            if (rank >= 2 && config.stages.count(Stage::Encounters)) {
                add("stages", "stage encounters needs session logs or intervals, inputs are encounters");
            }
        } catch (const std::exception& ex) {
            add("inputs", ex.what());
        }
    }
    if (config.smoothing.gap < 0) add("gap_seconds", "gap must be >= 0");
    if (config.smoothing.flicker < 0) add("flicker_seconds", "flicker must be >= 0");
    if (config.merge_gap < 0) add("merge_gap_seconds", "merge gap must be >= 0");
    if (!(config.threshold >= 0)) add("threshold", "threshold must be >= 0");
    if (config.modes.empty()) add("modes", "at least one graph mode is required");
    if (config.observation_span && *config.observation_span <= 0) add("observation_span", "observation span must be > 0");
    for (auto w : config.windows) {
        if (w <= 0) add("windows", fmt::format("window {} must be positive", w));
    }
    if (config.stages.count(Stage::Temporal) && config.windows.empty()) {
        add("windows", "the temporal stage needs at least one window");
    }
    if (!(config.gamma_factor > 0 && config.gamma_factor < 1)) add("gamma_factor", "gamma factor must lie in (0, 1)");
    if (config.baseline_m < 1) add("baseline_m", "baseline m must be >= 1");
    if (config.baseline_k < 2 || config.baseline_k % 2) add("baseline_k", "baseline k must be even and >= 2");
    if (!(config.baseline_p >= 0 && config.baseline_p <= 1)) add("baseline_p", "baseline p must lie in [0, 1]");
    if (config.probes < 2) add("probes", "probes must be >= 2");
    if (config.threads < 1) add("threads", "threads must be >= 1");
    if (config.output_dir.empty()) add("output_dir", "output directory is required");
    return v;
}

PipelineConfig apply_config_json(const PipelineConfig& base, std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    PipelineConfig c = base;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "inputs") {
                c.inputs.clear();
                for (const auto& p : value) c.inputs.emplace_back(p.get<std::string>());
            } else if (key == "input_kind") {
                c.input_kind = parse_input_kind(value.get<std::string>());
            } else if (key == "delimiter") {
                const auto d = value.get<std::string>();
                if (d.size() != 1) throw ConfigError("config: delimiter must be one character");
                c.format.delimiter = d[0];
            } else if (key == "gap_seconds") {
                c.smoothing.gap = value.get<Seconds>();
            } else if (key == "flicker_seconds") {
                c.smoothing.flicker = value.get<Seconds>();
            } else if (key == "merge_gap_seconds") {
                c.merge_gap = value.get<Seconds>();
            } else if (key == "threshold") {
                c.threshold = value.get<double>();
            } else if (key == "modes") {
                c.modes.clear();
                for (const auto& m : value) c.modes.push_back(parse_graph_mode(m.get<std::string>()));
            } else if (key == "origin") {
                c.origin = value.is_null() ? std::nullopt : std::optional<Seconds>(value.get<Seconds>());
            } else if (key == "observation_span") {
                c.observation_span = value.is_null() ? std::nullopt : std::optional<Seconds>(value.get<Seconds>());
            } else if (key == "windows") {
                c.windows.clear();
                for (const auto& w : value) {
                    c.windows.push_back(w.is_string() ? parse_duration(w.get<std::string>()) : w.get<Seconds>());
                }
            } else if (key == "gamma_factor") {
                c.gamma_factor = value.get<double>();
            } else if (key == "trajectory") {
                c.trajectory = value.get<bool>();
            } else if (key == "baselines") {
                c.baselines = value.get<bool>();
            } else if (key == "baseline_m") {
                c.baseline_m = value.get<std::size_t>();
            } else if (key == "baseline_k") {
                c.baseline_k = value.get<std::size_t>();
            } else if (key == "baseline_p") {
                c.baseline_p = value.get<double>();
            } else if (key == "static_dense_limit") {
                c.static_dense_limit = value.get<std::size_t>();
            } else if (key == "temporal_dense_limit") {
                c.temporal_dense_limit = value.get<std::size_t>();
            } else if (key == "probes") {
                c.probes = value.get<std::size_t>();
            } else if (key == "seed") {
                c.seed = value.get<std::uint64_t>();
            } else if (key == "threads") {
                c.threads = value.get<unsigned>();
            } else if (key == "output_dir") {
                c.output_dir = value.get<std::string>();
            } else if (key == "stages") {
                c.stages.clear();
                for (const auto& s : value) c.stages.insert(parse_stage(s.get<std::string>()));
            } else {
                throw ConfigError(fmt::format("config: unknown key '{}'", key));
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    return c;
}

PipelineConfig load_config_file(const std::filesystem::path& path, const PipelineConfig& base) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& ex) {
        throw ConfigError(ex.what());
    }
    return apply_config_json(base, text);
}

std::string config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["inputs"] = ordered_json::array();
    for (const auto& p : c.inputs) j["inputs"].push_back(p.string());
    j["input_kind"] = to_string(c.input_kind);
    j["delimiter"] = std::string(1, c.format.delimiter);
    j["gap_seconds"] = c.smoothing.gap;
    j["flicker_seconds"] = c.smoothing.flicker;
    j["merge_gap_seconds"] = c.merge_gap;
    j["threshold"] = c.threshold;
    j["modes"] = ordered_json::array();
    for (auto m : c.modes) j["modes"].push_back(to_string(m));
    j["origin"] = c.origin ? ordered_json(*c.origin) : ordered_json(nullptr);
    j["observation_span"] = c.observation_span ? ordered_json(*c.observation_span) : ordered_json(nullptr);
    j["windows"] = c.windows;
    j["gamma_factor"] = c.gamma_factor;
    j["trajectory"] = c.trajectory;
    j["baselines"] = c.baselines;
    j["baseline_m"] = c.baseline_m;
    j["baseline_k"] = c.baseline_k;
    j["baseline_p"] = c.baseline_p;
    j["static_dense_limit"] = c.static_dense_limit;
    j["temporal_dense_limit"] = c.temporal_dense_limit;
    j["probes"] = c.probes;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir.string();
    j["stages"] = ordered_json::array();
    for (auto s : all_stages()) {
        if (c.stages.count(s)) j["stages"].push_back(to_string(s));
    }
    return j.dump(2);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw InternalError("SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string format_manifest_json(const RunManifest& m) {
    ordered_json j;
    j["tool_version"] = m.tool_version;
    j["config"] = ordered_json::parse(m.config_json);
    auto digests = [](const std::vector<FileDigest>& files) {
        ordered_json arr = ordered_json::array();
        for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        return arr;
    };
    j["inputs"] = digests(m.inputs);
    j["artifacts"] = digests(m.artifacts);
    j["counts"] = m.counts;
    j["stage_seconds"] = m.stage_seconds;
    return j.dump(2) + "\n";
}

namespace {

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void emit(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        written_.push_back(path);
        write_file(path, content);
        artifacts_.push_back({name, sha256_hex(content), content.size()});
    }

    void remove_all() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        written_.clear();
    }

    std::vector<FileDigest> take_artifacts() {
        std::sort(artifacts_.begin(), artifacts_.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
        return std::move(artifacts_);
    }

    void track(const std::filesystem::path& p) { written_.push_back(p); }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    std::vector<FileDigest> artifacts_;
};

std::string window_label(Seconds w) { return std::to_string(w); }

struct RunState {
    std::vector<AssociationInterval> intervals;
    std::vector<EncounterEvent> encounters;
    Seconds origin = 0;
    Seconds span = 0;
    std::vector<std::pair<GraphMode, ContactGraph>> graphs;
    std::vector<std::pair<GraphMode, CommunicabilityReport>> reports;
};

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
    const auto violations = validate_config(config);
    if (!violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += fmt::format("\n  {}: {}", v.field, v.message);
        throw ConfigError(msg);
    }
    const InputKind kind = resolve_kind(config);
    const int rank = stage_rank(kind);
    auto wants = [&](Stage s) { return config.stages.count(s) > 0; };
    const bool need_graph = wants(Stage::Graph) || wants(Stage::Static) || wants(Stage::Compare);
    const bool need_encounters = need_graph || wants(Stage::Temporal) || wants(Stage::Encounters);
    const bool need_reports = wants(Stage::Static) || wants(Stage::Compare);

    RunManifest manifest;
    manifest.tool_version = tool_version();
    manifest.config_json = config_to_json(config);
    std::vector<std::string> input_texts;
    for (const auto& p : config.inputs) {
        input_texts.push_back(read_file(p));
        manifest.inputs.push_back({p.string(), sha256_hex(input_texts.back()), input_texts.back().size()});
    }

    ArtifactWriter out(config.output_dir);
    RunState st;
    StaticOptions static_opts;
    static_opts.dense_limit = config.static_dense_limit;
    static_opts.probes = config.probes;
    static_opts.seed = config.seed;
    static_opts.threads = config.threads;

    std::string current = "setup";
    auto timed = [&](Stage stage, auto&& body) {
        current = std::string(to_string(stage));
        const auto t0 = std::chrono::steady_clock::now();
        body();
        manifest.stage_seconds[current] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        if (rank == 0 && (wants(Stage::Ingest) || need_encounters)) {
            timed(Stage::Ingest, [&] {
                std::vector<SessionRecord> records;
                std::uint64_t malformed = 0;
                for (const auto& text : input_texts) {
                    std::istringstream in(text);
                    auto parsed = parse_session_log(in, config.format);
                    malformed += parsed.malformed_count;
                    std::move(parsed.records.begin(), parsed.records.end(), std::back_inserter(records));
                }
                manifest.counts["session_records"] = records.size();
                manifest.counts["malformed_lines"] = malformed;
                auto built = build_intervals(std::move(records));
                manifest.counts["raw_intervals"] = built.intervals.size();
                manifest.counts["reassociations"] = built.report.reassociated;
                manifest.counts["backfilled_stops"] = built.report.backfilled;
                manifest.counts["dropped_stops"] = built.report.dropped_stops;
                manifest.counts["dangling_starts"] = built.report.dangling_closed;
                st.intervals = smooth_ping_pong(std::move(built.intervals), config.smoothing);
                manifest.counts["intervals"] = st.intervals.size();
                if (wants(Stage::Ingest)) out.emit("intervals.csv", format_intervals_csv(st.intervals));
            });
        } else if (rank == 1) {
            for (const auto& text : input_texts) {
                auto part = parse_intervals_csv(text);
                std::move(part.begin(), part.end(), std::back_inserter(st.intervals));
            }
        }

        if (need_encounters) {
            if (rank <= 1) {
                timed(Stage::Encounters, [&] {
                    st.encounters = merge_cross_ap_encounters(extract_encounters(st.intervals, config.threads),
                                                              config.merge_gap);
                    manifest.counts["encounters"] = st.encounters.size();
                    if (wants(Stage::Encounters)) out.emit("encounters.csv", format_encounters_csv(st.encounters));
                });
            } else {
                for (const auto& text : input_texts) {
                    auto part = parse_encounters_csv(text);
                    std::move(part.begin(), part.end(), std::back_inserter(st.encounters));
                }
                std::sort(st.encounters.begin(), st.encounters.end(), encounter_order);
                manifest.counts["encounters"] = st.encounters.size();
            }
            if (st.encounters.empty() && (need_graph || wants(Stage::Temporal))) {
                throw DataError("no encounters were found");
            }
            const auto [first, length] = observation_window(st.encounters);
            st.origin = config.origin.value_or(first);
            st.span = config.observation_span.value_or(first + length - st.origin);
        }

        if (need_graph) {
            timed(Stage::Graph, [&] {
                const auto stats = pair_statistics(st.encounters);
                manifest.counts["pairs"] = stats.size();
                for (auto mode : config.modes) {
                    auto graph = build_graph(stats, mode, config.threshold, static_cast<double>(st.span));
                    const auto name = std::string(to_string(mode));
                    manifest.counts["graph_" + name + "_nodes"] = graph.node_count();
                    manifest.counts["graph_" + name + "_edges"] = graph.edge_count();
                    if (wants(Stage::Graph)) {
                        const auto files = format_graph(graph);
                        out.emit("graph_" + name + ".csv", files.edges_csv);
                        out.emit("graph_" + name + ".json", files.header_json);
                        out.emit("degree_ccdf_" + name + ".csv", format_ccdf_csv(degree_ccdf(graph), "degree"));
                        if (mode == GraphMode::Weighted && graph.edge_count() > 0) {
                            out.emit("weight_ccdf.csv", format_ccdf_csv(weight_distribution(graph), "weight"));
                        }
                    }
                    st.graphs.emplace_back(mode, std::move(graph));
                }
            });
        }

        if (need_reports) {
            timed(Stage::Static, [&] {
                for (const auto& [mode, graph] : st.graphs) {
                    if (graph.edge_count() == 0) throw DomainError("graph has no edges above the threshold");
                    auto report = total_communicability(graph, static_opts);
                    if (wants(Stage::Static)) {
                        const auto name = std::string(to_string(mode));
                        out.emit("static_" + name + ".json", format_static_report_json(report));
                        out.emit("static_nodes_" + name + ".csv", format_static_nodes_csv(graph, report));
                    }
                    st.reports.emplace_back(mode, std::move(report));
                }
            });
        }

        if (wants(Stage::Temporal)) {
            timed(Stage::Temporal, [&] {
                TemporalOptions topts;
                topts.dense_limit = config.temporal_dense_limit;
                topts.trajectory = config.trajectory;
                topts.threads = config.threads;
                topts.power.seed = config.seed;
                const auto results =
                    window_sweep(st.encounters, config.windows, st.origin, st.span, config.gamma_factor, topts);
                std::set<std::string> ids;
                for (const auto& e : st.encounters) {
                    ids.insert(e.node_a);
                    ids.insert(e.node_b);
                }
                const std::vector<std::string> seq_ids(ids.begin(), ids.end());
                out.emit("temporal_sweep.csv", format_sweep_csv(results));
                for (const auto& r : results) {
                    const auto label = window_label(r.row.window);
                    manifest.counts["snapshots_" + label] = r.row.snapshots;
                    out.emit("temporal_nodes_" + label + ".csv", format_temporal_nodes_csv(seq_ids, r.detail));
                    if (config.trajectory) out.emit("temporal_trajectory_" + label + ".csv", format_trajectory_csv(r.detail));
                }
            });
        }

        if (wants(Stage::Compare)) {
            timed(Stage::Compare, [&] {
                std::vector<ComparisonRow> rows;
                std::size_t n = 0;
                for (const auto& [mode, report] : st.reports) {
                    n = report.nodes;
                    rows.push_back({"observed_" + std::string(to_string(mode)), mode, report.nodes, report.edges,
                                    report.per_node, report.per_edge, report.normalized_subgraph_centrality,
                                    report.total, report.exact});
                }
                if (config.baselines) {
                    std::vector<LabeledGraph> synthetic;
                    SyntheticSpec ba{SyntheticModel::PreferentialAttachment, n, config.baseline_m, config.baseline_k,
                                     config.baseline_p, config.seed};
                    SyntheticSpec ws{SyntheticModel::SmallWorld, n, config.baseline_m, config.baseline_k,
                                     config.baseline_p, config.seed};
                    if (n > config.baseline_m) synthetic.push_back({"barabasi_albert", barabasi_albert(ba)});
                    if (n > config.baseline_k) synthetic.push_back({"watts_strogatz", watts_strogatz(ws)});
                    auto extra = compare_networks(synthetic, static_opts);
                    std::move(extra.begin(), extra.end(), std::back_inserter(rows));
                }
                out.emit("comparison.csv", format_comparison_csv(rows));
                out.emit("comparison.json", format_comparison_json(rows));
            });
        }

        manifest.artifacts = out.take_artifacts();
        const auto manifest_path = config.output_dir / "manifest.json";
        out.track(manifest_path);
        write_file(manifest_path, format_manifest_json(manifest));
    } catch (const Error& ex) {
        out.remove_all();
        throw Error(ex.kind(), fmt::format("stage {}: {}", current, ex.what()));
    } catch (const std::exception& ex) {
        out.remove_all();
        throw InternalError(fmt::format("stage {}: {}", current, ex.what()));
    }
    return manifest;
}

}  // namespace mobicomm
