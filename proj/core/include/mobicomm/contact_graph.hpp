#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mobicomm/encounter.hpp"

namespace mobicomm {

/// Contact statistics of one unordered pair (node_a < node_b).
struct PairStats {
    std::string node_a;
    std::string node_b;
    std::size_t encounters = 0;           // n_ij
    std::vector<Seconds> contact_times;   // CT samples, one per encounter
    std::vector<Seconds> intercontact;    // ICT samples, encounters - 1 of them
    std::size_t total_a = 0;              // N_i: encounters of node_a with anyone
    std::size_t total_b = 0;              // N_j
};

using PairKey = std::pair<std::string, std::string>;
using PairStatsMap = std::map<PairKey, PairStats>;

/// Groups encounters by pair. Overlapping events of one pair (negative
/// inter-contact time) raise InternalError.
PairStatsMap pair_statistics(const std::vector<EncounterEvent>& events);

/// Tie strength combining mean contact time, mean inter-contact time and
/// relative encounter frequency:
///
///   W = (mean CT / mean ICT) * 2 n / (N_i + N_j)
///
/// A pair seen once has no inter-contact sample; its mean ICT is taken to
/// be the observation span. Evaluated with a single rounding, so hand
/// examples with exact decimal answers reproduce bit-exactly.
double social_weight(const PairStats& stats, double observation_span);

enum class GraphMode { Unweighted, Weighted };

std::string_view to_string(GraphMode mode);
GraphMode parse_graph_mode(std::string_view text);

struct Edge {
    std::size_t u = 0;  // u < v
    std::size_t v = 0;
    double weight = 1.0;

    bool operator==(const Edge&) const = default;
};

/// Undirected simple graph with dense node indices. Immutable after
/// construction; no self-loops, one entry per unordered pair.
class ContactGraph {
public:
    ContactGraph() = default;

    /// Edges may be given in either orientation; they are canonicalized and
    /// sorted. Rejects self-loops, duplicates, non-positive weights, and
    /// non-unit weights in Unweighted mode.
    ContactGraph(std::vector<std::string> node_ids, std::vector<Edge> edges, GraphMode mode,
                 double threshold = 0.0, double observation_span = 0.0);

    std::size_t node_count() const { return node_ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    GraphMode mode() const { return mode_; }
    double threshold() const { return threshold_; }
    double observation_span() const { return observation_span_; }

    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Weighted degree d_i = sum_k a_ik.
    const std::vector<double>& degrees() const { return degrees_; }
    /// Number of distinct neighbours.
    std::size_t neighbour_count(std::size_t i) const { return neighbour_counts_[i]; }

    /// Throws DomainError for an unknown id.
    std::size_t index_of(std::string_view node_id) const;
    bool contains(std::string_view node_id) const;

    /// Same topology with every weight set to 1.
    ContactGraph as_unweighted() const;

    /// Applies a permutation: new index of old node i is perm[i].
    ContactGraph relabeled(const std::vector<std::size_t>& perm) const;

private:
    std::vector<std::string> node_ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
    std::vector<double> degrees_;
    std::vector<std::size_t> neighbour_counts_;
    GraphMode mode_ = GraphMode::Unweighted;
    double threshold_ = 0.0;
    double observation_span_ = 0.0;
};

/// Unweighted: edge iff n_ij >= 1 and (threshold == 0 or W_ij > threshold).
/// Weighted: edge of weight W_ij iff W_ij > threshold.
/// Only nodes with at least one edge are kept, indexed in lexicographic order.
ContactGraph build_graph(const PairStatsMap& stats, GraphMode mode, double threshold, double observation_span);

/// degree -> number of nodes with that many distinct neighbours.
std::map<std::size_t, std::size_t> degree_distribution(const ContactGraph& graph);

struct CcdfPoint {
    double value = 0;
    double fraction_at_least = 0;  // P(X >= value)

    bool operator==(const CcdfPoint&) const = default;
};

/// Empirical CCDF over the distinct degrees.
std::vector<CcdfPoint> degree_ccdf(const ContactGraph& graph);

/// Empirical CCDF over the distinct edge weights. DomainError in Unweighted mode.
std::vector<CcdfPoint> weight_distribution(const ContactGraph& graph);

/// Edge list CSV (node_a,node_b,weight) and its JSON header
/// {nodes, N, edges, mode, threshold, observation_span}.
struct GraphFiles {
    std::string edges_csv;
    std::string header_json;
};

GraphFiles format_graph(const ContactGraph& graph);
ContactGraph parse_graph(std::string_view header_json, std::string_view edges_csv);

std::string format_ccdf_csv(const std::vector<CcdfPoint>& points, std::string_view value_column);

}  // namespace mobicomm
