#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mobicomm/contact_graph.hpp"
#include "mobicomm/ingest.hpp"
#include "mobicomm/static_metrics.hpp"
#include "mobicomm/temporal_metrics.hpp"

namespace mobicomm {

/// Pipeline stages in dependency order.
enum class Stage { Ingest, Encounters, Graph, Static, Temporal, Compare };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);
const std::vector<Stage>& all_stages();

/// What the input files hold; Auto inspects the first line.
enum class InputKind { Auto, SessionLog, Intervals, Encounters };

std::string_view to_string(InputKind kind);
InputKind parse_input_kind(std::string_view text);

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;
    InputKind input_kind = InputKind::Auto;
    LogFormat format{};
    SmoothingParams smoothing{};
    Seconds merge_gap = 0;

    double threshold = 0.0;
    std::vector<GraphMode> modes{GraphMode::Weighted, GraphMode::Unweighted};
    /// Defaults to (first encounter start, last end - first start).
    std::optional<Seconds> origin;
    std::optional<Seconds> observation_span;

    std::vector<Seconds> windows;
    double gamma_factor = 0.85;
    bool trajectory = false;

    /// Synthetic baselines of the same size in the comparison table.
    bool baselines = true;
    std::size_t baseline_m = 2;
    std::size_t baseline_k = 2;
    double baseline_p = 0.0;

    std::size_t static_dense_limit = 4000;
    std::size_t temporal_dense_limit = 2000;
    std::size_t probes = 64;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    std::filesystem::path output_dir = "out";
    std::set<Stage> stages{Stage::Ingest, Stage::Encounters, Stage::Graph, Stage::Static, Stage::Temporal, Stage::Compare};
};

struct ConfigViolation {
    std::string field;
    std::string message;

    bool operator==(const ConfigViolation&) const = default;
};

/// Empty iff the configuration is runnable. Never throws.
std::vector<ConfigViolation> validate_config(const PipelineConfig& config);

/// Applies the keys present in a JSON document on top of `base`.
/// ConfigError on unknown keys or wrong types.
PipelineConfig apply_config_json(const PipelineConfig& base, std::string_view json_text);
PipelineConfig load_config_file(const std::filesystem::path& path, const PipelineConfig& base = {});

/// Canonical JSON echo of a configuration (inputs as given).
std::string config_to_json(const PipelineConfig& config);

struct FileDigest {
    std::string path;  // relative to the output directory for artifacts
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string tool_version;
    std::string config_json;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> artifacts;
    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, double> stage_seconds;
};

std::string sha256_hex(std::string_view bytes);
std::string format_manifest_json(const RunManifest& manifest);

/// Runs the requested stages (and whatever they depend on) and writes
/// each requested stage's artifacts plus manifest.json into output_dir.
/// ConfigError when validation fails. On a stage failure the files written
/// by this run are removed and the error is rethrown with the stage name
/// prepended, keeping its kind.
RunManifest run_pipeline(const PipelineConfig& config);

const char* tool_version();

}  // namespace mobicomm
