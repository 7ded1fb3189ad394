#include "mobicomm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "mobicomm/error.hpp"

namespace mobicomm {

std::uint64_t Random::index(std::uint64_t n) {
    if (n == 0) throw DomainError("Random::index of an empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Random::exponential(double mean) { return -mean * std::log1p(-uniform()); }

void validate(const SyntheticSpec& spec) {
    if (spec.model == SyntheticModel::PreferentialAttachment) {
        if (!(spec.m >= 1 && spec.nodes > spec.m)) {
            throw DomainError(fmt::format("preferential attachment needs N > m >= 1 (N={}, m={})", spec.nodes, spec.m));
        }
        return;
    }
    if (!(spec.k >= 2 && spec.k % 2 == 0 && spec.nodes > spec.k)) {
        throw DomainError(fmt::format("small world needs N > k >= 2 with k even (N={}, k={})", spec.nodes, spec.k));
    }
    if (!(spec.p >= 0 && spec.p <= 1)) throw DomainError("small world rewiring probability must lie in [0, 1]");
}

namespace {

std::vector<std::string> numbered_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
}

std::string padded(std::string_view prefix, std::size_t i, std::size_t count) {
    const auto width = std::to_string(count > 0 ? count - 1 : 0).size();
    return fmt::format("{}{:0{}}", prefix, i, width);
}

}  // namespace

ContactGraph barabasi_albert(const SyntheticSpec& spec) {
    auto s = spec;
    s.model = SyntheticModel::PreferentialAttachment;
    validate(s);
    Random rng(spec.seed);
    std::vector<Edge> edges;
    std::vector<std::size_t> endpoints;  // each node repeated degree times
    const std::size_t core = spec.m + 1;
    for (std::size_t u = 0; u < core; ++u) {
        for (std::size_t v = u + 1; v < core; ++v) {
            edges.push_back({u, v, 1.0});
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    std::vector<std::size_t> targets;
    for (std::size_t node = core; node < spec.nodes; ++node) {
        targets.clear();
        while (targets.size() < spec.m) {
            const auto t = endpoints[rng.index(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (auto t : targets) {
            edges.push_back({t, node, 1.0});
            endpoints.push_back(t);
            endpoints.push_back(node);
        }
    }
    return ContactGraph(numbered_ids(spec.nodes), std::move(edges), GraphMode::Unweighted);
}

ContactGraph watts_strogatz(const SyntheticSpec& spec) {
    auto s = spec;
    s.model = SyntheticModel::SmallWorld;
    validate(s);
    Random rng(spec.seed);
    const std::size_t n = spec.nodes;
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t j = 1; j <= spec.k / 2; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = (i + j) % n;
            adj[i].insert(v);
            adj[v].insert(i);
        }
    }
    if (spec.p > 0) {
        for (std::size_t j = 1; j <= spec.k / 2; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto old = (i + j) % n;
                if (!adj[i].count(old) || !rng.bernoulli(spec.p)) continue;
                if (adj[i].size() >= n - 1) continue;
                std::size_t w = 0;
                do {
                    w = rng.index(n);
                } while (w == i || adj[i].count(w));
                adj[i].erase(old);
                adj[old].erase(i);
                adj[i].insert(w);
                adj[w].insert(i);
            }
        }
    }
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : adj[u]) {
            if (u < v) edges.push_back({u, v, 1.0});
        }
    }
    return ContactGraph(numbered_ids(n), std::move(edges), GraphMode::Unweighted);
}

ContactGraph generate(const SyntheticSpec& spec) {
    return spec.model == SyntheticModel::PreferentialAttachment ? barabasi_albert(spec) : watts_strogatz(spec);
}

std::vector<EncounterEvent> poisson_contact_trace(const ContactTraceSpec& spec) {
    if (spec.nodes < 2) throw DomainError("contact trace needs at least two nodes");
    if (!(spec.days > 0 && spec.contacts_per_node_per_day > 0 && spec.mean_contact_seconds > 0)) {
        throw DomainError("contact trace rates and durations must be positive");
    }
    Random rng(spec.seed);
    const double span = spec.days * 86'400.0;
    const double rate = static_cast<double>(spec.nodes) * spec.contacts_per_node_per_day / 2.0 / 86'400.0;
    const auto horizon = static_cast<Seconds>(std::floor(span));
    std::vector<EncounterEvent> events;
    double t = 0;
    while (true) {
        t += rng.exponential(1.0 / rate);
        if (t >= span) break;
        const auto a = rng.index(spec.nodes);
        auto b = rng.index(spec.nodes - 1);
        if (b >= a) ++b;
        const auto start = static_cast<Seconds>(std::floor(t));
        const auto duration = std::max<Seconds>(1, std::llround(rng.exponential(spec.mean_contact_seconds)));
        const auto end = std::min(start + duration, horizon);
        if (end <= start) continue;
        auto ida = padded("n", std::min(a, b), spec.nodes);
        auto idb = padded("n", std::max(a, b), spec.nodes);
        events.push_back({std::move(ida), std::move(idb), "synthetic", start, end});
    }
    return collapse_simultaneous(std::move(events));
}

std::vector<SessionRecord> synthetic_association_log(const AssociationLogSpec& spec) {
    if (spec.nodes == 0 || spec.access_points < 2) throw DomainError("association log needs nodes and >= 2 APs");
    if (!(spec.days > 0 && spec.sessions_per_node_per_day > 0 && spec.mean_session_seconds > 0)) {
        throw DomainError("association log rates and durations must be positive");
    }
    Random rng(spec.seed);
    const double span = spec.days * 86'400.0;
    const double mean_gap = std::max(600.0, 86'400.0 / spec.sessions_per_node_per_day - spec.mean_session_seconds);
    constexpr std::size_t kHomeAps = 3;
    constexpr double kHomeProbability = 0.8;
    constexpr Seconds kHopSeconds = 10;

    std::vector<SessionRecord> records;
    auto visit = [&](const std::string& node, const std::string& ap, Seconds start, Seconds end) {
        records.push_back({start, ap, node, Seconds{0}, SessionStatus::Start});
        records.push_back({end, ap, node, end - start, SessionStatus::Stop});
    };
    for (std::size_t i = 0; i < spec.nodes; ++i) {
        const auto node = padded("node", i, spec.nodes);
        std::vector<std::size_t> home;
        for (std::size_t h = 0; h < kHomeAps; ++h) home.push_back(rng.index(spec.access_points));
        double t = rng.exponential(mean_gap);
        while (t < span) {
            const auto ap_index = rng.bernoulli(kHomeProbability) ? home[rng.index(home.size())]
                                                                  : rng.index(spec.access_points);
            const auto ap = padded("ap", ap_index, spec.access_points);
            const auto start = static_cast<Seconds>(t);
            const auto length = std::max<Seconds>(60, std::llround(rng.exponential(spec.mean_session_seconds)));
            const auto end = std::min(start + length, static_cast<Seconds>(span));
            if (end - start > 4 * kHopSeconds && rng.bernoulli(spec.ping_pong_probability)) {
                auto other_index = rng.index(spec.access_points - 1);
                if (other_index >= ap_index) ++other_index;
                const auto other = padded("ap", other_index, spec.access_points);
                const Seconds hop = start + (end - start) / 2;
                visit(node, ap, start, hop);
                visit(node, other, hop + 1, hop + 1 + kHopSeconds);
                visit(node, ap, hop + 2 + kHopSeconds, end);
            } else if (end > start) {
                visit(node, ap, start, end);
            }
            t = static_cast<double>(end) + rng.exponential(mean_gap);
        }
    }
    std::sort(records.begin(), records.end(), [](const SessionRecord& a, const SessionRecord& b) {
        return std::tie(a.timestamp, a.node_id, a.ap_id, a.status) < std::tie(b.timestamp, b.node_id, b.ap_id, b.status);
    });
    return records;
}

}  // namespace mobicomm
