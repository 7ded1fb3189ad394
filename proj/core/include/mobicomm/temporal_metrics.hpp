#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mobicomm/encounter.hpp"
#include "mobicomm/spectral.hpp"

namespace mobicomm {

/// Unweighted contact graph of one window; edges (u < v) over the
/// sequence's global node index, sorted and unique.
struct Snapshot {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    bool empty() const { return edges.empty(); }
};

/// Fixed-width windows [origin + (k-1) window, origin + k window), k = 1..M,
/// with M = floor(span / window) + 1. Empty windows are kept.
struct SnapshotSequence {
    Seconds window = 0;
    Seconds origin = 0;
    Seconds span = 0;
    std::vector<std::string> node_ids;  // lexicographic, shared by all snapshots
    std::vector<Snapshot> snapshots;
    /// window > span: a single snapshot equal to the aggregated static graph.
    bool degenerate = false;

    std::size_t count() const { return snapshots.size(); }
    std::size_t node_count() const { return node_ids.size(); }
    SymmetricMatrix adjacency(std::size_t k, Storage storage) const;
};

/// Every event must lie within [origin, origin + span] (DomainError
/// otherwise). An edge appears in every window its encounter intersects.
SnapshotSequence snapshot_sequence(const std::vector<EncounterEvent>& events, Seconds window, Seconds origin,
                                   Seconds span);

/// Smallest origin/span covering all events: (min start, max end - min start).
std::pair<Seconds, Seconds> observation_window(const std::vector<EncounterEvent>& events);

struct TemporalOptions {
    /// Sequences with at most this many nodes accumulate the full matrix C^M.
    std::size_t dense_limit = 2000;
    /// Connected components up to this size are handled with dense
    /// eigen/Cholesky factorizations; larger ones use power iteration and CG.
    std::size_t direct_component_limit = 256;
    bool trajectory = false;
    bool keep_matrix = true;
    unsigned threads = 1;
    PowerIterationOptions power{};
    SolverOptions solver{};
};

/// Spectral radius of every snapshot (0 for empty ones).
std::vector<double> snapshot_radii(const SnapshotSequence& seq, const TemporalOptions& options = {});

struct GammaChoice {
    double gamma = 0;
    double max_radius = 0;
    std::vector<double> radii;
};

/// gamma = factor / max_k rho(A_k). DomainError for factor outside (0, 1)
/// or when every snapshot is empty.
GammaChoice katz_gamma(const SnapshotSequence& seq, double factor = 0.85, const TemporalOptions& options = {});

struct TemporalCommunicability {
    double gamma = 0;
    std::size_t nodes = 0;
    std::size_t snapshots = 0;
    bool dense = false;
    /// C^M = prod_k (I - gamma A_k)^{-1}, when accumulated and kept.
    std::optional<DenseMatrix> matrix;
    Vector broadcast;  // C^M 1
    Vector receive;    // (C^M)^T 1
    double total = 0;  // 1^T C^M 1
    /// total after consuming snapshots 1..k, when requested.
    std::vector<double> trajectory;
};

/// Product of Katz resolvents in snapshot order. DomainError when
/// gamma * max_k rho(A_k) >= 1; NumericalError on overflow or solver failure.
TemporalCommunicability dynamic_communicability(const SnapshotSequence& seq, double gamma,
                                                const TemporalOptions& options = {});

struct TemporalTotals {
    double total = 0;         // C_t
    double per_snapshot = 0;  // C_ave = C_t / M
    double per_node = 0;      // C_t / N
};

TemporalTotals total_temporal_communicability(const TemporalCommunicability& tc);

struct SweepRow {
    Seconds window = 0;
    std::size_t snapshots = 0;
    double gamma = 0;
    double max_radius = 0;
    TemporalTotals totals;
    bool dense = false;
    bool degenerate = false;
};

struct WindowResult {
    SweepRow row;
    TemporalCommunicability detail;  // matrix dropped
};

/// One row per window, in input order.
std::vector<WindowResult> window_sweep(const std::vector<EncounterEvent>& events, const std::vector<Seconds>& windows,
                                       Seconds origin, Seconds span, double gamma_factor = 0.85,
                                       const TemporalOptions& options = {});

/// "3600", "1h", "2d", "1w", "1mo" (30 days). ConfigError on bad input.
Seconds parse_duration(std::string_view text);

/// window,M,gamma,C_t,C_t_per_node,C_ave
std::string format_sweep_csv(const std::vector<WindowResult>& results);
/// node_id,broadcast,receive
std::string format_temporal_nodes_csv(const std::vector<std::string>& node_ids, const TemporalCommunicability& tc);
/// snapshot,C_t
std::string format_trajectory_csv(const TemporalCommunicability& tc);

}  // namespace mobicomm
