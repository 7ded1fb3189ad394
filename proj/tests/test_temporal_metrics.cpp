#include <doctest.h>

#include <random>

#include "mobicomm/error.hpp"
#include "mobicomm/synthetic.hpp"
#include "mobicomm/temporal_metrics.hpp"
#include "oracles.hpp"

using namespace mobicomm;

namespace {

SnapshotSequence make_sequence(std::size_t n, std::vector<Snapshot> snaps) {
    SnapshotSequence seq;
    seq.window = 1;
    seq.span = static_cast<Seconds>(snaps.size()) - 1;
    for (std::size_t i = 0; i < n; ++i) seq.node_ids.push_back("n" + std::to_string(i));
    seq.snapshots = std::move(snaps);
    return seq;
}

Snapshot random_snapshot(std::mt19937_64& rng, std::size_t n, double density) {
    std::bernoulli_distribution coin(density);
    Snapshot s;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (coin(rng)) s.edges.emplace_back(i, j);
        }
    }
    return s;
}

Eigen::MatrixXd dense_of(const Snapshot& s, std::size_t n) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (auto [u, v] : s.edges) a(u, v) = a(v, u) = 1;
    return a;
}

std::vector<Eigen::MatrixXd> dense_of(const SnapshotSequence& seq) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& s : seq.snapshots) out.push_back(dense_of(s, seq.node_count()));
    return out;
}

double max_radius(const std::vector<Eigen::MatrixXd>& mats) {
    double rho = 0;
    for (const auto& a : mats) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        rho = std::max(rho, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return rho;
}

}  // namespace

TEST_CASE("snapshot windows") {
    auto seq = snapshot_sequence({{"a", "b", "p", 0, 100}}, 60, 0, 100);
    REQUIRE(seq.count() == 2);
    CHECK(seq.snapshots[0].edges.size() == 1);
    CHECK(seq.snapshots[1].edges.size() == 1);

    auto hourly = snapshot_sequence({{"a", "b", "p", 0, 50}}, 3600, 0, 50);
    CHECK(hourly.count() == 1);
    CHECK(hourly.degenerate);

    auto empty = snapshot_sequence({}, 60, 0, 600);
    CHECK(empty.count() == 11);
    for (const auto& s : empty.snapshots) CHECK(s.empty());

    auto late = snapshot_sequence({{"a", "b", "p", 120, 180}, {"a", "c", "p", 0, 10}}, 60, 0, 600);
    CHECK(late.count() == 11);
    CHECK(late.snapshots[0].edges.size() == 1);
    CHECK(late.snapshots[1].empty());
    CHECK(late.snapshots[2].edges.size() == 1);
    CHECK(late.snapshots[3].empty());

    CHECK_THROWS_AS(snapshot_sequence({{"a", "b", "p", 0, 700}}, 60, 0, 600), DomainError);
}

TEST_CASE("katz gamma") {
    auto pair = make_sequence(2, {Snapshot{{{0, 1}}}, Snapshot{{{0, 1}}}});
    CHECK(katz_gamma(pair).gamma == doctest::Approx(0.85).epsilon(1e-8));

    Snapshot k4{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    auto seq = make_sequence(4, {Snapshot{{{0, 1}}}, k4, Snapshot{}});
    CHECK(katz_gamma(seq).gamma == doctest::Approx(0.85 / 3).epsilon(1e-8));
    CHECK_THROWS_AS(katz_gamma(seq, 1.2), DomainError);
    CHECK_THROWS_AS(katz_gamma(seq, 0.0), DomainError);
    CHECK_THROWS_AS(katz_gamma(make_sequence(3, {Snapshot{}, Snapshot{}})), DomainError);
}

TEST_CASE("single snapshot single edge") {
    auto seq = make_sequence(2, {Snapshot{{{0, 1}}}});
    auto tc = dynamic_communicability(seq, 0.85);
    CHECK(std::abs(tc.total - 2 / (1 - 0.85)) <= 1e-10);
    CHECK_THROWS_AS(dynamic_communicability(seq, 1.0), DomainError);
}

TEST_CASE("all-empty sequence") {
    auto seq = make_sequence(5, std::vector<Snapshot>(4));
    auto tc = dynamic_communicability(seq, 0.5);
    REQUIRE(tc.matrix.has_value());
    CHECK(*tc.matrix == Eigen::MatrixXd::Identity(5, 5));
    auto t = total_temporal_communicability(tc);
    CHECK(t.total == 5.0);
    CHECK(t.per_snapshot == 1.25);
    CHECK(t.per_node == 1.0);
}

TEST_CASE("dense-inverse product oracle") {
    std::mt19937_64 rng(99);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 7;
        const std::size_t m = 1 + trial % 5;
        std::vector<Snapshot> snaps;
        for (std::size_t k = 0; k < m; ++k) snaps.push_back(random_snapshot(rng, n, 0.45));
        snaps[trial % m].edges.emplace_back(0, 1);
        std::sort(snaps[trial % m].edges.begin(), snaps[trial % m].edges.end());
        snaps[trial % m].edges.erase(std::unique(snaps[trial % m].edges.begin(), snaps[trial % m].edges.end()),
                                     snaps[trial % m].edges.end());
        auto seq = make_sequence(n, snaps);
        const auto mats = dense_of(seq);
        const double gamma = 0.85 / max_radius(mats);
        const auto expected = oracle::katz_product(mats, gamma);
        auto tc = dynamic_communicability(seq, gamma);
        REQUIRE(tc.matrix.has_value());
        worst = std::max(worst, (*tc.matrix - expected).cwiseAbs().maxCoeff());
        CHECK(tc.total == doctest::Approx(expected.sum()).epsilon(1e-12));
        CHECK((tc.broadcast - expected.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((tc.receive - expected.colwise().sum().transpose()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(tc.matrix->minCoeff() >= 0.0);
        CHECK(tc.total >= double(n));

        TemporalOptions free;
        free.dense_limit = 0;
        free.direct_component_limit = trial % 2 == 0 ? 0 : 256;
        auto mf = dynamic_communicability(seq, gamma, free);
        CHECK_FALSE(mf.matrix.has_value());
        CHECK(mf.total == doctest::Approx(tc.total).epsilon(1e-9));
        CHECK(std::abs(mf.broadcast.sum() - mf.receive.sum()) <= 1e-8 * mf.total);
        CHECK((mf.broadcast - tc.broadcast).cwiseAbs().maxCoeff() <= 1e-8 * tc.total);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("identity absorption") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + trial % 5;
        std::vector<Snapshot> snaps{random_snapshot(rng, n, 0.5), random_snapshot(rng, n, 0.5)};
        snaps[0].edges.emplace_back(0, n - 1);
        std::sort(snaps[0].edges.begin(), snaps[0].edges.end());
        snaps[0].edges.erase(std::unique(snaps[0].edges.begin(), snaps[0].edges.end()), snaps[0].edges.end());
        auto base = make_sequence(n, snaps);
        const double gamma = katz_gamma(base).gamma;
        auto a = dynamic_communicability(base, gamma);
        for (std::size_t pos = 0; pos <= snaps.size(); ++pos) {
            auto with_empty = snaps;
            with_empty.insert(with_empty.begin() + pos, Snapshot{});
            auto b = dynamic_communicability(make_sequence(n, with_empty), gamma);
            CHECK(*a.matrix == *b.matrix);
        }
    }
}

TEST_CASE("appending empty snapshots keeps the total and lowers the average") {
    auto one = make_sequence(3, {Snapshot{{{0, 1}, {1, 2}}}, Snapshot{{{0, 2}}}});
    auto two = one;
    two.snapshots.resize(4);
    auto a = total_temporal_communicability(dynamic_communicability(one, 0.4));
    auto b = total_temporal_communicability(dynamic_communicability(two, 0.4));
    CHECK(a.total == b.total);
    CHECK(b.per_snapshot == doctest::Approx(a.per_snapshot / 2));
}

TEST_CASE("order sensitivity") {
    auto forward = make_sequence(3, {Snapshot{{{0, 1}}}, Snapshot{{{1, 2}}}});
    auto backward = make_sequence(3, {Snapshot{{{1, 2}}}, Snapshot{{{0, 1}}}});
    auto f = dynamic_communicability(forward, 0.5);
    auto b = dynamic_communicability(backward, 0.5);
    CHECK((*f.matrix)(0, 2) > 0.0);
    CHECK((*b.matrix)(0, 2) == 0.0);
    CHECK((*f.matrix - *b.matrix).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("entries grow with gamma") {
    std::mt19937_64 rng(17);
    auto seq = make_sequence(6, {random_snapshot(rng, 6, 0.5), random_snapshot(rng, 6, 0.5), Snapshot{{{0, 5}}}});
    const auto g = katz_gamma(seq);
    auto lo = dynamic_communicability(seq, 0.5 * g.gamma);
    auto hi = dynamic_communicability(seq, g.gamma);
    CHECK(((*hi.matrix - *lo.matrix).array() >= 0.0).all());
}

TEST_CASE("trajectory ends at the total") {
    std::mt19937_64 rng(27);
    auto seq = make_sequence(5, {random_snapshot(rng, 5, 0.5), Snapshot{{{0, 4}}}, random_snapshot(rng, 5, 0.5)});
    TemporalOptions opts;
    opts.trajectory = true;
    auto tc = dynamic_communicability(seq, katz_gamma(seq).gamma, opts);
    REQUIRE(tc.trajectory.size() == 3);
    CHECK(tc.trajectory.back() == doctest::Approx(tc.total).epsilon(1e-12));
    for (std::size_t k = 1; k < tc.trajectory.size(); ++k) CHECK(tc.trajectory[k] >= tc.trajectory[k - 1]);
}

TEST_CASE("window sweep") {
    auto events = poisson_contact_trace({40, 3, 5, 600, 3});
    auto [origin, span] = observation_window(events);
    auto rows = window_sweep(events, {3600, 86'400, 604'800, 2'592'000}, origin, span);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].row.snapshots == std::size_t(span / 3600 + 1));
    CHECK(rows[3].row.degenerate);
    CHECK(rows[0].row.totals.total > rows[3].row.totals.total);

    auto single = window_sweep(events, {span + 1}, origin, span);
    auto static_seq = snapshot_sequence(events, span + 1, origin, span);
    auto direct = dynamic_communicability(static_seq, katz_gamma(static_seq).gamma);
    CHECK(single[0].row.snapshots == 1);
    CHECK(single[0].row.totals.total == doctest::Approx(direct.total).epsilon(1e-12));

    TemporalOptions threaded;
    threaded.threads = 4;
    auto again = window_sweep(events, {3600, 86'400}, origin, span, 0.85, threaded);
    CHECK(format_sweep_csv(again) == format_sweep_csv({rows[0], rows[1]}));
}

TEST_CASE("duration parsing") {
    CHECK(parse_duration("3600") == 3600);
    CHECK(parse_duration("90s") == 90);
    CHECK(parse_duration("1h") == 3600);
    CHECK(parse_duration("2d") == 172'800);
    CHECK(parse_duration("1w") == 604'800);
    CHECK(parse_duration("1mo") == 2'592'000);
    CHECK_THROWS_AS(parse_duration("0"), ConfigError);
    CHECK_THROWS_AS(parse_duration("abc"), ConfigError);
    CHECK_THROWS_AS(parse_duration("5y"), ConfigError);
}
