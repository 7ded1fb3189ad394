#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobicomm/contact_graph.hpp"
#include "mobicomm/spectral.hpp"

namespace mobicomm {

struct StaticOptions {
    /// Graphs with at most this many nodes use the exact dense spectral path.
    std::size_t dense_limit = 4000;
    /// Hutchinson probe vectors for diagonal estimation on the matrix-free path.
    std::size_t probes = 64;
    std::uint64_t seed = 0x5eed;
    unsigned threads = 1;
    KrylovOptions krylov{};
};

/// Sub-graph centrality S_i = [exp(M)]_ii, with M the mode's exponent matrix.
struct CentralityVector {
    std::vector<double> values;
    /// Per-node standard error of the stochastic estimate; empty when exact.
    std::vector<double> standard_error;
    GraphMode mode = GraphMode::Unweighted;
    bool exact = true;
};

CentralityVector subgraph_centrality(const ContactGraph& graph, const StaticOptions& options = {});

/// [exp(M)]_ij for distinct nodes. DomainError when i == j.
double communicability_pair(const ContactGraph& graph, std::size_t i, std::size_t j,
                            const StaticOptions& options = {});

struct CommunicabilityReport {
    GraphMode mode = GraphMode::Unweighted;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    bool exact = true;
    /// C(A): sum of every entry of exp(M), diagonal included.
    double total = 0;
    /// C(A) minus the diagonal.
    double off_diagonal_total = 0;
    double per_node = 0;  // C(A) / N
    double per_edge = 0;  // C(A) / |E|
    /// (1/N) sum_i S_i
    double normalized_subgraph_centrality = 0;
    /// sum_j [exp(M)]_ij per node
    std::vector<double> row_sums;
    CentralityVector centrality;
};

/// Dense path: explicit exp(M). Matrix-free path: 1^T exp(M) 1 by Lanczos
/// quadrature, row sums by a Lanczos action on the ones vector, diagonal
/// by Hutchinson estimation.
CommunicabilityReport total_communicability(const ContactGraph& graph, const StaticOptions& options = {});

struct LabeledGraph {
    std::string label;
    ContactGraph graph;
};

struct ComparisonRow {
    std::string label;
    GraphMode mode = GraphMode::Unweighted;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double per_node = 0;
    double per_edge = 0;
    double normalized_subgraph_centrality = 0;
    double total = 0;
    bool exact = true;
};

/// One row per graph, in input order.
std::vector<ComparisonRow> compare_networks(const std::vector<LabeledGraph>& graphs, const StaticOptions& options = {});

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows);
std::string format_comparison_json(const std::vector<ComparisonRow>& rows);

std::string format_static_report_json(const CommunicabilityReport& report);
/// node_id,degree,subgraph_centrality,row_sum_communicability
std::string format_static_nodes_csv(const ContactGraph& graph, const CommunicabilityReport& report);

}  // namespace mobicomm
