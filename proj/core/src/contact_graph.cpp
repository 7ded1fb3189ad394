#include "mobicomm/contact_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "mobicomm/error.hpp"
#include "mobicomm/text.hpp"

namespace mobicomm {

PairStatsMap pair_statistics(const std::vector<EncounterEvent>& events) {
    std::vector<const EncounterEvent*> sorted;
    sorted.reserve(events.size());
    for (const auto& e : events) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EncounterEvent* a, const EncounterEvent* b) { return encounter_order(*a, *b); });

    PairStatsMap stats;
    std::map<std::string, std::size_t> per_node;
    std::map<PairKey, Seconds> last_end;
    for (const EncounterEvent* e : sorted) {
        if (!(e->node_a < e->node_b)) throw InternalError("encounter pair not in canonical order: " + e->node_a);
        if (e->end <= e->start) throw InternalError("encounter with non-positive duration");
        PairKey key{e->node_a, e->node_b};
        auto [it, inserted] = stats.try_emplace(key);
        PairStats& s = it->second;
        if (inserted) {
            s.node_a = e->node_a;
            s.node_b = e->node_b;
        } else {
            const Seconds ict = e->start - last_end[key];
            if (ict < 0) {
                throw InternalError(fmt::format("overlapping encounters of pair ({}, {}) at t={}", e->node_a,
                                                e->node_b, e->start));
            }
            s.intercontact.push_back(ict);
        }
        last_end[key] = e->end;
        s.contact_times.push_back(e->duration());
        ++s.encounters;
        ++per_node[e->node_a];
        ++per_node[e->node_b];
    }
    for (auto& [key, s] : stats) {
        s.total_a = per_node[s.node_a];
        s.total_b = per_node[s.node_b];
    }
    return stats;
}

double social_weight(const PairStats& stats, double observation_span) {
    const std::size_t n = stats.encounters;
    if (n == 0) throw DomainError("social weight of a pair without encounters");
    if (!(observation_span > 0)) throw DomainError("observation span must be positive");
    if (stats.contact_times.size() != n || stats.intercontact.size() != n - 1) {
        throw InternalError("pair statistics sample counts inconsistent with encounter count");
    }
    const double ct_sum = static_cast<double>(std::accumulate(stats.contact_times.begin(), stats.contact_times.end(), Seconds{0}));
    const double totals = static_cast<double>(stats.total_a + stats.total_b);
    if (n == 1) return 2.0 * ct_sum / (observation_span * totals);

    const double ict_sum = static_cast<double>(std::accumulate(stats.intercontact.begin(), stats.intercontact.end(), Seconds{0}));
    if (ict_sum == 0) {
        throw NumericalError(fmt::format("mean inter-contact time is zero for pair ({}, {})", stats.node_a, stats.node_b));
    }
    // (ct_sum / n) / (ict_sum / (n - 1)) * 2n / totals, n cancelled
    return 2.0 * ct_sum * static_cast<double>(n - 1) / (ict_sum * totals);
}

std::string_view to_string(GraphMode mode) { return mode == GraphMode::Weighted ? "weighted" : "unweighted"; }

GraphMode parse_graph_mode(std::string_view text) {
    if (text == "weighted") return GraphMode::Weighted;
    if (text == "unweighted") return GraphMode::Unweighted;
    throw ConfigError(fmt::format("unknown graph mode '{}' (expected weighted or unweighted)", text));
}

ContactGraph::ContactGraph(std::vector<std::string> node_ids, std::vector<Edge> edges, GraphMode mode,
                           double threshold, double observation_span)
    : node_ids_(std::move(node_ids)),
      edges_(std::move(edges)),
      mode_(mode),
      threshold_(threshold),
      observation_span_(observation_span) {
    const std::size_t n = node_ids_.size();
    index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!index_.emplace(node_ids_[i], i).second) throw DomainError("duplicate node id " + node_ids_[i]);
    }
    for (auto& e : edges_) {
        if (e.u >= n || e.v >= n) throw DomainError("edge endpoint out of range");
        if (e.u == e.v) throw DomainError("self-loop on node " + node_ids_[e.u]);
        if (!(e.weight > 0) || !std::isfinite(e.weight)) throw DomainError("edge weight must be positive and finite");
        if (mode_ == GraphMode::Unweighted && e.weight != 1.0) throw DomainError("unweighted graph with weight != 1");
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
        if (edges_[k].u == edges_[k - 1].u && edges_[k].v == edges_[k - 1].v) {
            throw DomainError(fmt::format("parallel edge ({}, {})", node_ids_[edges_[k].u], node_ids_[edges_[k].v]));
        }
    }
    degrees_.assign(n, 0.0);
    neighbour_counts_.assign(n, 0);
    for (const auto& e : edges_) {
        degrees_[e.u] += e.weight;
        degrees_[e.v] += e.weight;
        ++neighbour_counts_[e.u];
        ++neighbour_counts_[e.v];
    }
}

std::size_t ContactGraph::index_of(std::string_view node_id) const {
    const auto it = index_.find(std::string(node_id));
    if (it == index_.end()) throw DomainError(fmt::format("node '{}' not in graph", node_id));
    return it->second;
}

bool ContactGraph::contains(std::string_view node_id) const { return index_.count(std::string(node_id)) > 0; }

ContactGraph ContactGraph::as_unweighted() const {
    auto edges = edges_;
    for (auto& e : edges) e.weight = 1.0;
    return ContactGraph(node_ids_, std::move(edges), GraphMode::Unweighted, threshold_, observation_span_);
}

ContactGraph ContactGraph::relabeled(const std::vector<std::size_t>& perm) const {
    if (perm.size() != node_count()) throw DomainError("permutation size mismatch");
    std::vector<std::string> ids(node_count());
    for (std::size_t i = 0; i < perm.size(); ++i) ids.at(perm[i]) = node_ids_[i];
    auto edges = edges_;
    for (auto& e : edges) {
        e.u = perm[e.u];
        e.v = perm[e.v];
    }
    return ContactGraph(std::move(ids), std::move(edges), mode_, threshold_, observation_span_);
}

ContactGraph build_graph(const PairStatsMap& stats, GraphMode mode, double threshold, double observation_span) {
    if (threshold < 0) throw DomainError("threshold must be >= 0");
    const bool need_weight = mode == GraphMode::Weighted || threshold > 0;

    std::vector<std::pair<const PairStats*, double>> kept;
    std::set<std::string> nodes;
    for (const auto& [key, s] : stats) {
        if (s.encounters == 0) continue;
        const double w = need_weight ? social_weight(s, observation_span) : 1.0;
        if (need_weight && !(w > threshold)) continue;
        kept.emplace_back(&s, mode == GraphMode::Weighted ? w : 1.0);
        nodes.insert(s.node_a);
        nodes.insert(s.node_b);
    }
    std::vector<std::string> ids(nodes.begin(), nodes.end());
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    std::vector<Edge> edges;
    edges.reserve(kept.size());
    for (const auto& [s, w] : kept) edges.push_back({index.at(s->node_a), index.at(s->node_b), w});
    return ContactGraph(std::move(ids), std::move(edges), mode, threshold, observation_span);
}

std::map<std::size_t, std::size_t> degree_distribution(const ContactGraph& graph) {
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t i = 0; i < graph.node_count(); ++i) ++hist[graph.neighbour_count(i)];
    return hist;
}

namespace {

std::vector<CcdfPoint> ccdf_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<CcdfPoint> out;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        out.push_back({values[i], static_cast<double>(values.size() - i) / n});
    }
    return out;
}

}  // namespace

std::vector<CcdfPoint> degree_ccdf(const ContactGraph& graph) {
    std::vector<double> degrees;
    degrees.reserve(graph.node_count());
    for (std::size_t i = 0; i < graph.node_count(); ++i) degrees.push_back(static_cast<double>(graph.neighbour_count(i)));
    return ccdf_of(std::move(degrees));
}

std::vector<CcdfPoint> weight_distribution(const ContactGraph& graph) {
    if (graph.mode() != GraphMode::Weighted) throw DomainError("weight distribution requires a weighted graph");
    std::vector<double> weights;
    weights.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) weights.push_back(e.weight);
    return ccdf_of(std::move(weights));
}

GraphFiles format_graph(const ContactGraph& graph) {
    GraphFiles files;
    files.edges_csv = "node_a,node_b,weight\n";
    const auto& ids = graph.node_ids();
    for (const auto& e : graph.edges()) {
        files.edges_csv += fmt::format("{},{},{}\n", ids[e.u], ids[e.v], format_double(e.weight));
    }
    nlohmann::ordered_json header;
    header["N"] = graph.node_count();
    header["edges"] = graph.edge_count();
    header["mode"] = to_string(graph.mode());
    header["threshold"] = graph.threshold();
    header["observation_span"] = graph.observation_span();
    header["nodes"] = ids;
    files.header_json = header.dump(2) + "\n";
    return files;
}

ContactGraph parse_graph(std::string_view header_json, std::string_view edges_csv) {
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_json);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("graph header: ") + ex.what());
    }
    std::vector<std::string> ids;
    GraphMode mode{};
    double threshold = 0, span = 0;
    std::size_t declared_n = 0, declared_edges = 0;
    try {
        ids = header.at("nodes").get<std::vector<std::string>>();
        mode = parse_graph_mode(header.at("mode").get<std::string>());
        threshold = header.value("threshold", 0.0);
        span = header.value("observation_span", 0.0);
        declared_n = header.at("N").get<std::size_t>();
        declared_edges = header.at("edges").get<std::size_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("graph header: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw DataError(std::string("graph header: ") + ex.what());
    }
    if (declared_n != ids.size()) throw DataError("graph header: N does not match node list");
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

    std::vector<Edge> edges;
    std::size_t pos = 0, line_no = 0;
    while (pos < edges_csv.size()) {
        auto nl = edges_csv.find('\n', pos);
        if (nl == std::string_view::npos) nl = edges_csv.size();
        const auto line = trim(edges_csv.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || (line_no == 1 && line.starts_with("node_a"))) continue;
        const auto f = split_fields(line, ',');
        if (f.size() != 3) throw DataError(fmt::format("graph CSV line {}: expected 3 fields", line_no));
        const auto a = index.find(trim(f[0]));
        const auto b = index.find(trim(f[1]));
        const auto w = parse_double(f[2]);
        if (a == index.end() || b == index.end() || !w) {
            throw DataError(fmt::format("graph CSV line {}: unknown node or bad weight", line_no));
        }
        edges.push_back({a->second, b->second, *w});
    }
    if (edges.size() != declared_edges) throw DataError("graph header: edge count does not match CSV");
    try {
        return ContactGraph(std::move(ids), std::move(edges), mode, threshold, span);
    } catch (const DomainError& ex) {
        throw DataError(std::string("graph: ") + ex.what());
    }
}

std::string format_ccdf_csv(const std::vector<CcdfPoint>& points, std::string_view value_column) {
    std::string out = fmt::format("{},ccdf\n", value_column);
    for (const auto& p : points) out += fmt::format("{},{}\n", format_double(p.value), format_double(p.fraction_at_least));
    return out;
}

}  // namespace mobicomm
