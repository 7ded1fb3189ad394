#include "mobicomm/static_metrics.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "mobicomm/error.hpp"
#include "mobicomm/parallel.hpp"
#include "mobicomm/text.hpp"

namespace mobicomm {

namespace {

void require_no_isolated(const ContactGraph& graph) {
    if (graph.node_count() == 0) throw DomainError("graph has no nodes");
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        if (graph.neighbour_count(i) == 0) {
            throw DomainError(fmt::format("node '{}' is isolated", graph.node_ids()[i]));
        }
    }
}

bool use_dense(const ContactGraph& graph, const StaticOptions& options) {
    return graph.node_count() <= options.dense_limit;
}

Vector rademacher_probe(std::size_t n, std::uint64_t seed, std::size_t probe) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (probe + 1));
    Vector z(static_cast<Eigen::Index>(n));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) bits = rng();
        z[static_cast<Eigen::Index>(i)] = (bits & 1) ? 1.0 : -1.0;
        bits >>= 1;
    }
    return z;
}

// Hutchinson estimate of diag(exp(M)) with per-entry standard error.
CentralityVector estimate_diagonal(const SymmetricMatrix& m, GraphMode mode, const StaticOptions& options) {
    const std::size_t n = m.size();
    const std::size_t probes = std::max<std::size_t>(options.probes, 2);
    std::vector<Vector> samples(probes);
    parallel_for(probes, options.threads, [&](std::size_t p) {
        const Vector z = rademacher_probe(n, options.seed, p);
        samples[p] = z.cwiseProduct(exp_action(m, z, options.krylov));
    });
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(probes);
    Vector var = Vector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& s : samples) var += (s - mean).cwiseAbs2();
    var /= static_cast<double>(probes - 1);

    CentralityVector out;
    out.mode = mode;
    out.exact = false;
    out.values.assign(mean.data(), mean.data() + mean.size());
    out.standard_error.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.standard_error[i] = std::sqrt(var[static_cast<Eigen::Index>(i)] / static_cast<double>(probes));
    }
    return out;
}

}  // namespace

CentralityVector subgraph_centrality(const ContactGraph& graph, const StaticOptions& options) {
    require_no_isolated(graph);
    if (!use_dense(graph, options)) {
        return estimate_diagonal(exponent_matrix(graph, Storage::Sparse), graph.mode(), options);
    }
    const auto e = matrix_exponential(exponent_matrix(graph, Storage::Dense));
    const Vector d = e.dense_values().diagonal();
    CentralityVector out;
    out.mode = graph.mode();
    out.values.assign(d.data(), d.data() + d.size());
    return out;
}

double communicability_pair(const ContactGraph& graph, std::size_t i, std::size_t j, const StaticOptions& options) {
    if (i == j) throw DomainError("communicability needs two distinct nodes; use subgraph_centrality for i == j");
    if (i >= graph.node_count() || j >= graph.node_count()) throw DomainError("node index out of range");
    if (use_dense(graph, options)) {
        return matrix_exponential(exponent_matrix(graph, Storage::Dense)).entry(i, j);
    }
    Vector ej = Vector::Zero(static_cast<Eigen::Index>(graph.node_count()));
    ej[static_cast<Eigen::Index>(j)] = 1.0;
    return exp_action(exponent_matrix(graph, Storage::Sparse), ej, options.krylov)[static_cast<Eigen::Index>(i)];
}

CommunicabilityReport total_communicability(const ContactGraph& graph, const StaticOptions& options) {
    require_no_isolated(graph);
    CommunicabilityReport r;
    r.mode = graph.mode();
    r.nodes = graph.node_count();
    r.edges = graph.edge_count();
    const auto n = static_cast<Eigen::Index>(r.nodes);

    double diagonal_sum = 0;
    if (use_dense(graph, options)) {
        const auto e = matrix_exponential(exponent_matrix(graph, Storage::Dense));
        const DenseMatrix& values = e.dense_values();
        const Vector rows = values.rowwise().sum();
        const Vector diag = values.diagonal();
        r.row_sums.assign(rows.data(), rows.data() + n);
        r.centrality.mode = graph.mode();
        r.centrality.values.assign(diag.data(), diag.data() + n);
        r.total = values.sum();
        diagonal_sum = diag.sum();
    } else {
        const auto m = exponent_matrix(graph, Storage::Sparse);
        const Vector ones = Vector::Ones(n);
        r.exact = false;
        r.total = exp_quadratic_form(m, ones, options.krylov);
        const Vector rows = exp_action(m, ones, options.krylov);
        r.row_sums.assign(rows.data(), rows.data() + n);
        r.centrality = estimate_diagonal(m, graph.mode(), options);
        for (double s : r.centrality.values) diagonal_sum += s;
    }
    r.off_diagonal_total = r.total - diagonal_sum;
    r.per_node = r.total / static_cast<double>(r.nodes);
    r.per_edge = r.total / static_cast<double>(r.edges);
    r.normalized_subgraph_centrality = diagonal_sum / static_cast<double>(r.nodes);
    return r;
}

std::vector<ComparisonRow> compare_networks(const std::vector<LabeledGraph>& graphs, const StaticOptions& options) {
    std::vector<ComparisonRow> rows(graphs.size());
    StaticOptions inner = options;
    inner.threads = graphs.size() > 1 ? 1 : options.threads;
    parallel_for(graphs.size(), options.threads, [&](std::size_t k) {
        const auto report = total_communicability(graphs[k].graph, inner);
        rows[k] = {graphs[k].label,
                   report.mode,
                   report.nodes,
                   report.edges,
                   report.per_node,
                   report.per_edge,
                   report.normalized_subgraph_centrality,
                   report.total,
                   report.exact};
    });
    return rows;
}

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "label,mode,nodes,edges,per_node,per_edge,normalized_subgraph_centrality,total,exact\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.label, to_string(r.mode), r.nodes, r.edges,
                           format_double(r.per_node), format_double(r.per_edge),
                           format_double(r.normalized_subgraph_centrality), format_double(r.total),
                           r.exact ? "true" : "false");
    }
    return out;
}

std::string format_comparison_json(const std::vector<ComparisonRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["label"] = r.label;
        j["mode"] = to_string(r.mode);
        j["nodes"] = r.nodes;
        j["edges"] = r.edges;
        j["per_node"] = r.per_node;
        j["per_edge"] = r.per_edge;
        j["normalized_subgraph_centrality"] = r.normalized_subgraph_centrality;
        j["total"] = r.total;
        j["exact"] = r.exact;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string format_static_report_json(const CommunicabilityReport& report) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(report.mode);
    j["nodes"] = report.nodes;
    j["edges"] = report.edges;
    j["exact"] = report.exact;
    j["total_communicability"] = report.total;
    j["off_diagonal_communicability"] = report.off_diagonal_total;
    j["communicability_per_node"] = report.per_node;
    j["communicability_per_edge"] = report.per_edge;
    j["normalized_subgraph_centrality"] = report.normalized_subgraph_centrality;
    if (!report.centrality.exact) {
        double worst = 0;
        for (double se : report.centrality.standard_error) worst = std::max(worst, se);
        j["centrality_max_standard_error"] = worst;
        j["centrality_estimator"] = "hutchinson";
    }
    return j.dump(2) + "\n";
}

std::string format_static_nodes_csv(const ContactGraph& graph, const CommunicabilityReport& report) {
    const bool with_se = !report.centrality.exact;
    std::string out = with_se ? "node_id,degree,subgraph_centrality,row_sum_communicability,centrality_standard_error\n"
                              : "node_id,degree,subgraph_centrality,row_sum_communicability\n";
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        out += fmt::format("{},{},{},{}", graph.node_ids()[i], graph.neighbour_count(i),
                           format_double(report.centrality.values[i]), format_double(report.row_sums[i]));
        if (with_se) out += "," + format_double(report.centrality.standard_error[i]);
        out += '\n';
    }
    return out;
}

}  // namespace mobicomm
