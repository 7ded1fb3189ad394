#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical paths.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "mobicomm/encounter.hpp"
#include "mobicomm/ingest.hpp"

namespace oracle {

/// sum_{k=0}^{terms-1} S^k / k!
inline Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& s, int terms = 60) {
    const auto n = s.rows();
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k < terms; ++k) {
        term = term * s / static_cast<double>(k);
        result += term;
    }
    return result;
}

/// sum_{m=0}^{terms-1} gamma^m S^m v
inline Eigen::VectorXd neumann_series(const Eigen::MatrixXd& s, double gamma, const Eigen::VectorXd& v, int terms = 200) {
    Eigen::VectorXd result = v;
    Eigen::VectorXd term = v;
    for (int m = 1; m < terms; ++m) {
        term = gamma * (s * term);
        result += term;
    }
    return result;
}

/// prod_k (I - gamma A_k)^{-1} via explicit dense inverses, left to right.
inline Eigen::MatrixXd katz_product(const std::vector<Eigen::MatrixXd>& snapshots, double gamma) {
    const auto n = snapshots.front().rows();
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    for (const auto& a : snapshots) {
        const Eigen::MatrixXd r = (Eigen::MatrixXd::Identity(n, n) - gamma * a).inverse();
        c = c * r;
    }
    return c;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = u(rng);
    }
    return m;
}

/// Random simple graph adjacency with zero diagonal.
inline Eigen::MatrixXd random_adjacency(std::mt19937_64& rng, int n, double density) {
    std::bernoulli_distribution coin(density);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (coin(rng)) a(i, j) = a(j, i) = 1.0;
        }
    }
    return a;
}

using EventKey = std::tuple<std::string, std::string, std::string, mobicomm::Seconds, mobicomm::Seconds>;

/// All-pairs overlap at each AP, then overlapping events of one pair joined
/// (earliest start, latest end, AP of the longest piece).
inline std::set<EventKey> brute_force_encounters(const std::vector<mobicomm::AssociationInterval>& intervals) {
    struct Piece {
        mobicomm::Seconds start, end;
        std::string ap;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Piece>> by_pair;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        for (std::size_t j = i + 1; j < intervals.size(); ++j) {
            const auto& x = intervals[i];
            const auto& y = intervals[j];
            if (x.ap_id != y.ap_id || x.node_id == y.node_id) continue;
            const auto s = std::max(x.start, y.start);
            const auto e = std::min(x.end, y.end);
            if (s >= e) continue;
            auto key = std::minmax(x.node_id, y.node_id);
            by_pair[{key.first, key.second}].push_back({s, e, x.ap_id});
        }
    }
    std::set<EventKey> out;
    for (auto& [pair, pieces] : by_pair) {
        std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
            return std::tie(a.start, a.ap, a.end) < std::tie(b.start, b.ap, b.end);
        });
        std::size_t i = 0;
        while (i < pieces.size()) {
            auto start = pieces[i].start, end = pieces[i].end;
            auto ap = pieces[i].ap;
            auto longest = end - start;
            std::size_t j = i + 1;
            while (j < pieces.size() && pieces[j].start < end) {
                if (pieces[j].end - pieces[j].start > longest) {
                    longest = pieces[j].end - pieces[j].start;
                    ap = pieces[j].ap;
                }
                end = std::max(end, pieces[j].end);
                ++j;
            }
            out.emplace(pair.first, pair.second, ap, start, end);
            i = j;
        }
    }
    return out;
}

inline std::set<EventKey> as_keys(const std::vector<mobicomm::EncounterEvent>& events) {
    std::set<EventKey> out;
    for (const auto& e : events) out.emplace(e.node_a, e.node_b, e.poi_id, e.start, e.end);
    return out;
}

/// Smoothed-looking random intervals: per (node, AP) disjoint with gaps.
inline std::vector<mobicomm::AssociationInterval> random_intervals(std::mt19937_64& rng, int nodes, int aps,
                                                                   int per_ap_max, mobicomm::Seconds horizon) {
    std::uniform_int_distribution<int> node_pick(0, nodes - 1);
    std::uniform_int_distribution<mobicomm::Seconds> time(0, horizon);
    std::uniform_int_distribution<mobicomm::Seconds> len(1, horizon / 10 + 1);
    std::vector<mobicomm::AssociationInterval> out;
    for (int ap = 0; ap < aps; ++ap) {
        std::uniform_int_distribution<int> count_pick(0, per_ap_max);
        const int count = count_pick(rng);
        std::map<int, std::vector<std::pair<mobicomm::Seconds, mobicomm::Seconds>>> taken;
        for (int c = 0; c < count; ++c) {
            const int node = node_pick(rng);
            const auto s = time(rng);
            const auto e = s + len(rng);
            bool clash = false;
            for (const auto& [ts, te] : taken[node]) clash = clash || (s <= te && ts <= e);
            if (clash) continue;
            taken[node].emplace_back(s, e);
            out.push_back({"n" + std::to_string(node), "ap" + std::to_string(ap), s, e});
        }
    }
    return out;
}

}  // namespace oracle
