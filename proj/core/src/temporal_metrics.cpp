#include "mobicomm/temporal_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "mobicomm/error.hpp"
#include "mobicomm/parallel.hpp"
#include "mobicomm/text.hpp"

namespace mobicomm {

SymmetricMatrix SnapshotSequence::adjacency(std::size_t k, Storage storage) const {
    const auto& snap = snapshots.at(k);
    std::vector<MatrixEntry> entries;
    entries.reserve(snap.edges.size());
    for (const auto& [u, v] : snap.edges) entries.push_back({u, v, 1.0});
    if (storage == Storage::Sparse) return SymmetricMatrix::sparse(node_count(), entries);
    const auto n = static_cast<Eigen::Index>(node_count());
    DenseMatrix m = DenseMatrix::Zero(n, n);
    for (const auto& e : entries) m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = 1.0;
    return SymmetricMatrix::dense(std::move(m));
}

std::pair<Seconds, Seconds> observation_window(const std::vector<EncounterEvent>& events) {
    if (events.empty()) return {0, 0};
    Seconds lo = events.front().start, hi = events.front().end;
    for (const auto& e : events) {
        lo = std::min(lo, e.start);
        hi = std::max(hi, e.end);
    }
    return {lo, hi - lo};
}

SnapshotSequence snapshot_sequence(const std::vector<EncounterEvent>& events, Seconds window, Seconds origin,
                                   Seconds span) {
    if (window <= 0) throw DomainError("snapshot window must be positive");
    if (span < 0) throw DomainError("observation span must be >= 0");
    SnapshotSequence seq;
    seq.window = window;
    seq.origin = origin;
    seq.span = span;
    seq.degenerate = window > span;
    const auto m = static_cast<std::size_t>(span / window) + 1;
    seq.snapshots.resize(m);

    std::set<std::string> ids;
    for (const auto& e : events) {
        if (e.start < origin || e.end > origin + span) {
            throw DomainError(fmt::format("encounter [{}, {}] outside observation window [{}, {}]", e.start, e.end,
                                          origin, origin + span));
        }
        ids.insert(e.node_a);
        ids.insert(e.node_b);
    }
    seq.node_ids.assign(ids.begin(), ids.end());
    std::map<std::string_view, std::uint32_t> index;
    for (std::size_t i = 0; i < seq.node_ids.size(); ++i) index.emplace(seq.node_ids[i], static_cast<std::uint32_t>(i));

    for (const auto& e : events) {
        if (e.end <= e.start) continue;
        auto u = index.at(e.node_a), v = index.at(e.node_b);
        if (u > v) std::swap(u, v);
        // windows k with origin + k w < end and origin + (k+1) w > start
        const auto first = static_cast<std::size_t>((e.start - origin) / window);
        const auto last = std::min(static_cast<std::size_t>((e.end - origin - 1) / window), m - 1);
        for (std::size_t k = first; k <= last; ++k) seq.snapshots[k].edges.emplace_back(u, v);
    }
    for (auto& snap : seq.snapshots) {
        std::sort(snap.edges.begin(), snap.edges.end());
        snap.edges.erase(std::unique(snap.edges.begin(), snap.edges.end()), snap.edges.end());
    }
    return seq;
}

namespace {

// One connected component of a snapshot, in local coordinates.
struct Block {
    std::vector<Eigen::Index> nodes;  // global indices, ascending
    SymmetricMatrix adjacency;
    double radius = 0;
};

struct PreparedSnapshot {
    std::vector<Block> blocks;
    double radius = 0;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

PreparedSnapshot prepare(const Snapshot& snap, bool dense_blocks, const TemporalOptions& options) {
    PreparedSnapshot out;
    if (snap.empty()) return out;

    std::vector<std::uint32_t> active;
    active.reserve(2 * snap.edges.size());
    for (const auto& [u, v] : snap.edges) {
        active.push_back(u);
        active.push_back(v);
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    auto local = [&](std::uint32_t g) {
        return static_cast<std::size_t>(std::lower_bound(active.begin(), active.end(), g) - active.begin());
    };

    std::vector<std::size_t> parent(active.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (const auto& [u, v] : snap.edges) {
        const auto a = find_root(parent, local(u)), b = find_root(parent, local(v));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::size_t, std::size_t> block_of_root;  // ordered: blocks follow smallest member
    std::vector<std::size_t> block_of(active.size()), position(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
        const auto root = find_root(parent, i);
        auto [it, inserted] = block_of_root.try_emplace(root, out.blocks.size());
        if (inserted) out.blocks.emplace_back();
        block_of[i] = it->second;
        position[i] = out.blocks[it->second].nodes.size();
        out.blocks[it->second].nodes.push_back(active[i]);
    }
    std::vector<std::vector<MatrixEntry>> entries(out.blocks.size());
    for (const auto& [u, v] : snap.edges) {
        const auto lu = local(u), lv = local(v);
        entries[block_of[lu]].push_back({position[lu], position[lv], 1.0});
    }
    for (std::size_t b = 0; b < out.blocks.size(); ++b) {
        auto& block = out.blocks[b];
        const std::size_t n = block.nodes.size();
        const bool small = n <= options.direct_component_limit;
        if (dense_blocks || small) {
            const auto k = static_cast<Eigen::Index>(n);
            DenseMatrix m = DenseMatrix::Zero(k, k);
            for (const auto& e : entries[b]) {
                m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = 1.0;
            }
            block.adjacency = SymmetricMatrix::dense(std::move(m));
        } else {
            block.adjacency = SymmetricMatrix::sparse(n, entries[b]);
        }
        if (n == 2) {
            block.radius = 1.0;  // single edge
        } else if (small) {
            block.radius = spectral_radius_exact(block.adjacency);
        } else {
            block.radius = spectral_radius(block.adjacency, options.power);
        }
        out.radius = std::max(out.radius, block.radius);
    }
    return out;
}

std::vector<PreparedSnapshot> prepare_all(const SnapshotSequence& seq, bool dense_blocks, const TemporalOptions& options) {
    std::vector<PreparedSnapshot> prepared(seq.count());
    parallel_for(seq.count(), options.threads,
                 [&](std::size_t k) { prepared[k] = prepare(seq.snapshots[k], dense_blocks, options); });
    return prepared;
}

double max_radius(const std::vector<PreparedSnapshot>& prepared) {
    double rho = 0;
    for (const auto& p : prepared) rho = std::max(rho, p.radius);
    return rho;
}

struct FactorizedSnapshot {
    std::vector<const Block*> blocks;
    std::vector<ResolventSolver> solvers;
};

std::vector<FactorizedSnapshot> factorize(const std::vector<PreparedSnapshot>& prepared, double gamma,
                                          const TemporalOptions& options) {
    std::vector<FactorizedSnapshot> out(prepared.size());
    parallel_for(prepared.size(), options.threads, [&](std::size_t k) {
        for (const auto& block : prepared[k].blocks) {
            out[k].blocks.push_back(&block);
            out[k].solvers.emplace_back(block.adjacency, gamma, block.radius, options.solver);
        }
    });
    return out;
}

// v <- (I - gamma A_k)^{-1} v, block by block.
void apply_resolvent(const FactorizedSnapshot& f, Vector& v) {
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
        const auto& nodes = f.blocks[b]->nodes;
        Vector local(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t i = 0; i < nodes.size(); ++i) local[static_cast<Eigen::Index>(i)] = v[nodes[i]];
        const Vector solved = f.solvers[b].apply(local);
        for (std::size_t i = 0; i < nodes.size(); ++i) v[nodes[i]] = solved[static_cast<Eigen::Index>(i)];
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw NumericalError(fmt::format("{} overflowed; reduce the gamma factor or the window count", what));
}

TemporalCommunicability accumulate_dense(const SnapshotSequence& seq, const std::vector<FactorizedSnapshot>& factors,
                                         TemporalCommunicability tc, const TemporalOptions& options) {
    const auto n = static_cast<Eigen::Index>(seq.node_count());
    DenseMatrix c = DenseMatrix::Identity(n, n);
    Vector column_sums = Vector::Ones(n);
    for (const auto& f : factors) {
        for (std::size_t b = 0; b < f.blocks.size(); ++b) {
            const auto& nodes = f.blocks[b]->nodes;
            const auto k = static_cast<Eigen::Index>(nodes.size());
            // C[:, S] <- C[:, S] B^{-1}, i.e. B X^T = C[:, S]^T with B symmetric
            DenseMatrix cols_t(k, n);
            for (Eigen::Index i = 0; i < k; ++i) cols_t.row(i) = c.col(nodes[static_cast<std::size_t>(i)]).transpose();
            const DenseMatrix solved = f.solvers[b].apply(cols_t);
            for (Eigen::Index i = 0; i < k; ++i) {
                const auto g = nodes[static_cast<std::size_t>(i)];
                c.col(g) = solved.row(i).transpose();
                column_sums[g] = c.col(g).sum();
            }
        }
        if (options.trajectory) tc.trajectory.push_back(column_sums.sum());
    }
    if (!c.allFinite()) throw NumericalError("dynamic communicability matrix overflowed");
    tc.broadcast = c.rowwise().sum();
    tc.receive = c.colwise().sum().transpose();
    tc.total = c.sum();
    if (options.keep_matrix) tc.matrix = std::move(c);
    return tc;
}

TemporalCommunicability accumulate_matrix_free(const SnapshotSequence& seq,
                                               const std::vector<FactorizedSnapshot>& factors,
                                               TemporalCommunicability tc, const TemporalOptions& options) {
    const auto n = static_cast<Eigen::Index>(seq.node_count());
    Vector b = Vector::Ones(n);
    Vector r = Vector::Ones(n);
    std::vector<double> trajectory;

    // C 1 associates right to left; 1^T C left to right (each factor symmetric)
    auto broadcast_pass = [&] {
        for (auto it = factors.rbegin(); it != factors.rend(); ++it) apply_resolvent(*it, b);
    };
    auto receive_pass = [&] {
        for (const auto& f : factors) {
            apply_resolvent(f, r);
            if (options.trajectory) trajectory.push_back(r.sum());
        }
    };
    if (options.threads > 1) {
        std::exception_ptr error;
        std::thread worker([&] {
            try {
                receive_pass();
            } catch (...) {
                error = std::current_exception();
            }
        });
        try {
            broadcast_pass();
        } catch (...) {
            worker.join();
            throw;
        }
        worker.join();
        if (error) std::rethrow_exception(error);
    } else {
        broadcast_pass();
        receive_pass();
    }
    require_finite(b, "broadcast communicability");
    require_finite(r, "receive communicability");
    tc.broadcast = std::move(b);
    tc.receive = std::move(r);
    tc.total = tc.broadcast.sum();
    tc.trajectory = std::move(trajectory);
    return tc;
}

TemporalCommunicability communicability_from_prepared(const SnapshotSequence& seq,
                                                      const std::vector<PreparedSnapshot>& prepared, double gamma,
                                                      bool dense, const TemporalOptions& options) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0");
    const double rho = max_radius(prepared);
    if (gamma * rho >= 1.0) {
        throw DomainError(fmt::format("gamma * max spectral radius = {} must be < 1", gamma * rho));
    }
    TemporalCommunicability tc;
    tc.gamma = gamma;
    tc.nodes = seq.node_count();
    tc.snapshots = seq.count();
    tc.dense = dense;
    const auto factors = factorize(prepared, gamma, options);
    return dense ? accumulate_dense(seq, factors, std::move(tc), options)
                 : accumulate_matrix_free(seq, factors, std::move(tc), options);
}

void check_factor(double factor) {
    if (!(factor > 0 && factor < 1)) throw DomainError(fmt::format("gamma factor {} must lie in (0, 1)", factor));
}

}  // namespace

std::vector<double> snapshot_radii(const SnapshotSequence& seq, const TemporalOptions& options) {
    const auto prepared = prepare_all(seq, false, options);
    std::vector<double> radii;
    radii.reserve(prepared.size());
    for (const auto& p : prepared) radii.push_back(p.radius);
    return radii;
}

GammaChoice katz_gamma(const SnapshotSequence& seq, double factor, const TemporalOptions& options) {
    check_factor(factor);
    GammaChoice g;
    g.radii = snapshot_radii(seq, options);
    g.max_radius = *std::max_element(g.radii.begin(), g.radii.end());
    if (g.max_radius == 0) throw DomainError("every snapshot is empty; gamma is undefined");
    g.gamma = factor / g.max_radius;
    return g;
}

TemporalCommunicability dynamic_communicability(const SnapshotSequence& seq, double gamma,
                                                const TemporalOptions& options) {
    const bool dense = seq.node_count() <= options.dense_limit;
    const auto prepared = prepare_all(seq, dense, options);
    return communicability_from_prepared(seq, prepared, gamma, dense, options);
}

TemporalTotals total_temporal_communicability(const TemporalCommunicability& tc) {
    TemporalTotals t;
    t.total = tc.total;
    t.per_snapshot = tc.snapshots ? tc.total / static_cast<double>(tc.snapshots) : 0.0;
    t.per_node = tc.nodes ? tc.total / static_cast<double>(tc.nodes) : 0.0;
    return t;
}

std::vector<WindowResult> window_sweep(const std::vector<EncounterEvent>& events, const std::vector<Seconds>& windows,
                                       Seconds origin, Seconds span, double gamma_factor,
                                       const TemporalOptions& options) {
    if (windows.empty()) throw DomainError("window sweep needs at least one window");
    check_factor(gamma_factor);
    std::vector<WindowResult> results(windows.size());
    TemporalOptions inner = options;
    inner.keep_matrix = false;
    inner.threads = windows.size() > 1 ? 1 : options.threads;
    parallel_for(windows.size(), options.threads, [&](std::size_t w) {
        const auto seq = snapshot_sequence(events, windows[w], origin, span);
        const bool dense = seq.node_count() <= inner.dense_limit;
        const auto prepared = prepare_all(seq, dense, inner);
        const double rho = max_radius(prepared);
        if (rho == 0) throw DomainError("every snapshot is empty; gamma is undefined");
        const double gamma = gamma_factor / rho;
        auto& out = results[w];
        out.detail = communicability_from_prepared(seq, prepared, gamma, dense, inner);
        out.row.window = windows[w];
        out.row.snapshots = seq.count();
        out.row.gamma = gamma;
        out.row.max_radius = rho;
        out.row.totals = total_temporal_communicability(out.detail);
        out.row.dense = dense;
        out.row.degenerate = seq.degenerate;
    });
    return results;
}

Seconds parse_duration(std::string_view text) {
    text = trim(text);
    std::size_t digits = 0;
    while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') ++digits;
    const auto value = parse_int(text.substr(0, digits));
    const auto suffix = text.substr(digits);
    Seconds unit = 0;
    if (suffix.empty() || suffix == "s") unit = 1;
    else if (suffix == "h") unit = 3600;
    else if (suffix == "d") unit = 86'400;
    else if (suffix == "w") unit = 604'800;
    else if (suffix == "mo") unit = 2'592'000;
    if (!value || unit == 0 || *value <= 0) {
        throw ConfigError(fmt::format("bad duration '{}' (expected N, Nh, Nd, Nw or Nmo with N > 0)", text));
    }
    return *value * unit;
}

std::string format_sweep_csv(const std::vector<WindowResult>& results) {
    std::string out = "window,M,gamma,C_t,C_t_per_node,C_ave\n";
    for (const auto& r : results) {
        out += fmt::format("{},{},{},{},{},{}\n", r.row.window, r.row.snapshots, format_double(r.row.gamma),
                           format_double(r.row.totals.total), format_double(r.row.totals.per_node),
                           format_double(r.row.totals.per_snapshot));
    }
    return out;
}

std::string format_temporal_nodes_csv(const std::vector<std::string>& node_ids, const TemporalCommunicability& tc) {
    std::string out = "node_id,broadcast,receive\n";
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += fmt::format("{},{},{}\n", node_ids[i], format_double(tc.broadcast[k]), format_double(tc.receive[k]));
    }
    return out;
}

std::string format_trajectory_csv(const TemporalCommunicability& tc) {
    std::string out = "snapshot,C_t\n";
    for (std::size_t k = 0; k < tc.trajectory.size(); ++k) out += fmt::format("{},{}\n", k + 1, format_double(tc.trajectory[k]));
    return out;
}

}  // namespace mobicomm
