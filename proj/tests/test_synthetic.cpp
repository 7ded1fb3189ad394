#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mobicomm/error.hpp"
#include "mobicomm/ingest.hpp"
#include "mobicomm/static_metrics.hpp"
#include "mobicomm/synthetic.hpp"

using namespace mobicomm;

namespace {

SyntheticSpec ba(std::size_t n, std::size_t m, std::uint64_t seed = 1) {
    return {SyntheticModel::PreferentialAttachment, n, m, 2, 0.0, seed};
}

SyntheticSpec ws(std::size_t n, std::size_t k, double p, std::uint64_t seed = 1) {
    return {SyntheticModel::SmallWorld, n, 2, k, p, seed};
}

void check_simple(const ContactGraph& g) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : g.edges()) {
        CHECK(e.u < e.v);
        CHECK(seen.emplace(e.u, e.v).second);
    }
}

}  // namespace

TEST_CASE("preferential attachment edge counts") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CHECK(barabasi_albert(ba(5, 1, seed)).edge_count() == 4);
        auto g = barabasi_albert(ba(1000, 2, seed));
        CHECK(g.edge_count() == 2 * (1000 - 3) + 3);
        check_simple(g);
    }
}

TEST_CASE("preferential attachment is heavy tailed") {
    auto g = barabasi_albert(ba(1000, 2, 7));
    std::vector<std::size_t> deg;
    for (std::size_t i = 0; i < g.node_count(); ++i) deg.push_back(g.neighbour_count(i));
    std::sort(deg.begin(), deg.end());
    CHECK(deg.back() > 10 * deg[deg.size() / 2]);

    auto big = barabasi_albert(ba(5000, 2, 7));
    auto ccdf = degree_ccdf(big);
    CHECK(std::log10(ccdf.front().fraction_at_least / ccdf.back().fraction_at_least) >= 2.0);
}

TEST_CASE("small world lattice") {
    auto c10 = watts_strogatz(ws(10, 2, 0.0));
    CHECK(c10.edge_count() == 10);
    for (double d : c10.degrees()) CHECK(d == 2.0);
    for (auto [n, k] : {std::pair<std::size_t, std::size_t>{20, 4}, {31, 6}}) {
        CHECK(watts_strogatz(ws(n, k, 0.0)).edge_count() == n * k / 2);
    }
    auto rewired = watts_strogatz(ws(200, 4, 0.3, 5));
    CHECK(rewired.edge_count() == 400);
    check_simple(rewired);
}

TEST_CASE("small world per-node communicability is e squared") {
    auto r = total_communicability(watts_strogatz(ws(500, 2, 0.0)));
    CHECK(std::abs(r.per_node - 7.38905609893065) <= 1e-9);
}

TEST_CASE("same seed same graph") {
    CHECK(barabasi_albert(ba(300, 3, 9)).edges() == barabasi_albert(ba(300, 3, 9)).edges());
    CHECK(watts_strogatz(ws(300, 4, 0.2, 9)).edges() == watts_strogatz(ws(300, 4, 0.2, 9)).edges());
    CHECK(barabasi_albert(ba(300, 3, 9)).edges() != barabasi_albert(ba(300, 3, 10)).edges());
}

TEST_CASE("invalid specs") {
    CHECK_THROWS_AS(barabasi_albert(ba(2, 2)), DomainError);
    CHECK_THROWS_AS(barabasi_albert(ba(10, 0)), DomainError);
    CHECK_THROWS_AS(watts_strogatz(ws(10, 3, 0.0)), DomainError);
    CHECK_THROWS_AS(watts_strogatz(ws(4, 4, 0.0)), DomainError);
    CHECK_THROWS_AS(watts_strogatz(ws(10, 2, 1.5)), DomainError);
}

TEST_CASE("random helpers") {
    Random a(3), b(3);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Random r(4);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.index(7) < 7);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("poisson contact trace") {
    ContactTraceSpec spec{50, 2, 5, 600, 11};
    auto events = poisson_contact_trace(spec);
    CHECK(events == poisson_contact_trace(spec));
    const double expected = 50 * 2 * 5 / 2.0;
    CHECK(double(events.size()) > 0.8 * expected);
    CHECK(double(events.size()) < 1.2 * expected);
    for (const auto& e : events) {
        CHECK(e.node_a < e.node_b);
        CHECK(e.start < e.end);
        CHECK(e.end <= 2 * 86'400);
    }
}

TEST_CASE("synthetic association log parses back") {
    AssociationLogSpec spec;
    spec.nodes = 30;
    spec.access_points = 8;
    spec.days = 2;
    auto records = synthetic_association_log(spec);
    auto built = build_intervals(records);
    CHECK(built.intervals.size() * 2 == records.size());
    CHECK(built.report.dropped_stops == 0);
    CHECK(smooth_ping_pong(built.intervals).size() < built.intervals.size());
}
