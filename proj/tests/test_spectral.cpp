#include <doctest.h>

#include <cmath>
#include <random>

#include "mobicomm/error.hpp"
#include "mobicomm/spectral.hpp"
#include "mobicomm/synthetic.hpp"
#include "oracles.hpp"

using namespace mobicomm;

namespace {

ContactGraph single_edge(double w = 1.0) {
    return ContactGraph({"a", "b"}, {{0, 1, w}}, w == 1.0 ? GraphMode::Unweighted : GraphMode::Weighted);
}

ContactGraph complete(std::size_t n) {
    std::vector<std::string> ids;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("n" + std::to_string(i));
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    }
    return ContactGraph(ids, edges, GraphMode::Unweighted);
}

SymmetricMatrix from_dense(const Eigen::MatrixXd& m, Storage storage) {
    if (storage == Storage::Dense) return SymmetricMatrix::dense(m);
    std::vector<MatrixEntry> entries;
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = i; j < m.cols(); ++j) {
            if (m(i, j) != 0) entries.push_back({std::size_t(i), std::size_t(j), m(i, j)});
        }
    }
    return SymmetricMatrix::sparse(m.rows(), entries);
}

}  // namespace

TEST_CASE("normalized adjacency examples") {
    for (double w : {1.0, 0.15, 42.0}) {
        auto s = normalized_adjacency(single_edge(w), Storage::Dense).to_dense();
        CHECK(s(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s(0, 0) == 0.0);
    }
    ContactGraph path({"a", "b", "c"}, {{0, 1, 1}, {1, 2, 1}}, GraphMode::Unweighted);
    auto p = normalized_adjacency(path, Storage::Sparse).to_dense();
    CHECK(p(0, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p(1, 2) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p(0, 2) == 0.0);

    auto ring = watts_strogatz({SyntheticModel::SmallWorld, 12, 2, 4, 0.0, 1});
    auto n = normalized_adjacency(ring, Storage::Dense).to_dense();
    auto a = adjacency_matrix(ring, Storage::Dense).to_dense();
    CHECK((n - a / 4.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("isolated node cannot be normalized") {
    ContactGraph g({"a", "b", "c"}, {{0, 1, 1}}, GraphMode::Unweighted);
    CHECK_THROWS_AS(normalized_adjacency(g, Storage::Dense), DomainError);
}

TEST_CASE("matrix exponential closed forms") {
    auto zero = matrix_exponential(SymmetricMatrix::zero(2, Storage::Dense)).to_dense();
    CHECK((zero - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

    auto e = matrix_exponential(adjacency_matrix(single_edge(), Storage::Dense)).to_dense();
    CHECK(std::abs(e(0, 0) - std::cosh(1.0)) <= 1e-12);
    CHECK(std::abs(e(0, 1) - std::sinh(1.0)) <= 1e-12);
    CHECK(std::abs(e(1, 1) - std::cosh(1.0)) <= 1e-12);
}

TEST_CASE("matrix exponential against the Taylor series") {
    std::mt19937_64 rng(1);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 10;
        const auto m = oracle::random_symmetric(rng, n);
        const auto got = matrix_exponential(SymmetricMatrix::dense(m)).to_dense();
        worst = std::max(worst, (got - oracle::taylor_exp(m)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("exponential trace identity and diagonal bound") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = oracle::random_adjacency(rng, 3 + trial, 0.4);
        auto s = SymmetricMatrix::dense(a);
        auto e = matrix_exponential(s).to_dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const double expected = es.eigenvalues().array().exp().sum();
        CHECK(e.trace() == doctest::Approx(expected).epsilon(1e-10));
        CHECK(e.diagonal().minCoeff() >= 1.0);
    }
}

TEST_CASE("regular graph has the ones vector as Perron vector") {
    auto ring = watts_strogatz({SyntheticModel::SmallWorld, 30, 2, 4, 0.0, 1});
    auto e = matrix_exponential(adjacency_matrix(ring, Storage::Dense)).to_dense();
    Eigen::VectorXd row = e * Eigen::VectorXd::Ones(30);
    CHECK((row.array() - std::exp(4.0)).abs().maxCoeff() < 1e-9);
}

TEST_CASE("spectral radius") {
    CHECK(spectral_radius(adjacency_matrix(single_edge(), Storage::Sparse)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(spectral_radius(SymmetricMatrix::zero(5, Storage::Sparse)) == 0.0);
    const auto k4 = adjacency_matrix(complete(4), Storage::Sparse);
    CHECK(spectral_radius(k4) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(spectral_radius_exact(k4) == doctest::Approx(3.0).epsilon(1e-12));

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = oracle::random_adjacency(rng, 20 + trial, 0.2);
        auto s = SymmetricMatrix::dense(a);
        CHECK(spectral_radius(s) == doctest::Approx(spectral_radius_exact(s)).epsilon(1e-6));
    }
}

TEST_CASE("resolvent closed forms") {
    Vector v(3);
    v << 1, -2, 3;
    CHECK((resolvent_apply(SymmetricMatrix::zero(3, Storage::Sparse), 0.5, v) - v).norm() == 0.0);

    auto a = adjacency_matrix(single_edge(), Storage::Dense);
    auto x = resolvent_apply(a, 0.85, Vector::Ones(2));
    CHECK(x(0) == doctest::Approx(1 / (1 - 0.85)).epsilon(1e-12));
    CHECK(x(1) == doctest::Approx(1 / (1 - 0.85)).epsilon(1e-12));
    CHECK_THROWS_AS(resolvent_apply(a, 1.0, Vector::Ones(2)), DomainError);
    CHECK_THROWS_AS(resolvent_apply(a, -0.1, Vector::Ones(2)), DomainError);
}

TEST_CASE("resolvent against dense inverse and Neumann series") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 7;
        auto a = oracle::random_adjacency(rng, n, 0.5);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
        const double gamma = rho > 0 ? 0.85 / rho : 0.5;
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = g(rng);
        const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - gamma * a).inverse();
        for (auto storage : {Storage::Dense, Storage::Sparse}) {
            auto x = resolvent_apply(from_dense(a, storage), gamma, v);
            CHECK((x - inv * v).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, (inv * v).cwiseAbs().maxCoeff()));
            CHECK((x - oracle::neumann_series(a, gamma, v)).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("Lanczos action and quadrature") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 20 + 10 * trial;
        auto a = oracle::random_adjacency(rng, n, 0.1);
        auto s = from_dense(a, Storage::Sparse);
        auto e = matrix_exponential(SymmetricMatrix::dense(a)).to_dense();
        Vector v = Vector::Ones(n);
        Vector ev = e * v;
        CHECK((exp_action(s, v) - ev).norm() <= 1e-9 * ev.norm());
        CHECK(exp_quadratic_form(s, v) == doctest::Approx(v.dot(ev)).epsilon(1e-10));
    }
}

TEST_CASE("sparse and dense storage agree") {
    std::mt19937_64 rng(12);
    auto m = oracle::random_symmetric(rng, 9);
    auto d = from_dense(m, Storage::Dense);
    auto s = from_dense(m, Storage::Sparse);
    Vector x = Vector::LinSpaced(9, -1, 1);
    CHECK((d.multiply(x) - s.multiply(x)).norm() < 1e-13);
    CHECK((d.to_dense() - s.to_dense()).norm() < 1e-15);
    CHECK(d.frobenius_norm() == doctest::Approx(s.frobenius_norm()));
}
