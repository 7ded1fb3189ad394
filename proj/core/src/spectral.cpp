#include "mobicomm/spectral.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "mobicomm/error.hpp"

namespace mobicomm {

namespace {

// exp() of anything above this overflows a double.
constexpr double kMaxExponent = 709.0;

void require_finite(const SymmetricMatrix& s) {
    const bool finite = s.is_dense() ? s.dense_values().allFinite()
                                     : Eigen::Map<const Vector>(s.sparse_upper().valuePtr(),
                                                                s.sparse_upper().nonZeros())
                                           .allFinite();
    if (!finite) throw NumericalError("matrix has non-finite entries");
}

}  // namespace

SymmetricMatrix SymmetricMatrix::dense(DenseMatrix values) {
    if (values.rows() != values.cols()) throw DomainError("symmetric matrix must be square");
    values.triangularView<Eigen::StrictlyLower>() = values.transpose().triangularView<Eigen::StrictlyLower>();
    SymmetricMatrix m;
    m.data_ = std::move(values);
    return m;
}

SymmetricMatrix SymmetricMatrix::sparse(std::size_t n, const std::vector<MatrixEntry>& entries) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries.size());
    for (const auto& e : entries) {
        if (e.row >= n || e.col >= n) throw DomainError("sparse entry out of range");
        const auto r = static_cast<Eigen::Index>(std::min(e.row, e.col));
        const auto c = static_cast<Eigen::Index>(std::max(e.row, e.col));
        triplets.emplace_back(r, c, e.value);
    }
    SparseUpper upper(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    upper.setFromTriplets(triplets.begin(), triplets.end());
    upper.makeCompressed();
    SymmetricMatrix m;
    m.data_ = std::move(upper);
    return m;
}

SymmetricMatrix SymmetricMatrix::zero(std::size_t n, Storage storage) {
    if (storage == Storage::Dense) {
        const auto k = static_cast<Eigen::Index>(n);
        return dense(DenseMatrix::Zero(k, k));
    }
    return sparse(n, {});
}

std::size_t SymmetricMatrix::size() const {
    return static_cast<std::size_t>(is_dense() ? dense_values().rows() : sparse_upper().rows());
}

Vector SymmetricMatrix::multiply(const Vector& x) const {
    if (is_dense()) return dense_values() * x;
    return sparse_upper().selfadjointView<Eigen::Upper>() * x;
}

double SymmetricMatrix::entry(std::size_t i, std::size_t j) const {
    const auto r = static_cast<Eigen::Index>(std::min(i, j));
    const auto c = static_cast<Eigen::Index>(std::max(i, j));
    if (is_dense()) return dense_values()(r, c);
    return sparse_upper().coeff(r, c);
}

DenseMatrix SymmetricMatrix::to_dense() const {
    if (is_dense()) return dense_values();
    DenseMatrix upper = DenseMatrix(sparse_upper());
    DenseMatrix full = upper.selfadjointView<Eigen::Upper>();
    return full;
}

double SymmetricMatrix::frobenius_norm() const {
    if (is_dense()) return dense_values().norm();
    const auto& u = sparse_upper();
    double diag = 0, off = 0;
    for (Eigen::Index r = 0; r < u.outerSize(); ++r) {
        for (SparseUpper::InnerIterator it(u, r); it; ++it) {
            (it.col() == r ? diag : off) += it.value() * it.value();
        }
    }
    return std::sqrt(diag + 2 * off);
}

std::size_t SymmetricMatrix::upper_nonzeros() const {
    if (!is_dense()) return static_cast<std::size_t>(sparse_upper().nonZeros());
    return static_cast<std::size_t>((dense_values().triangularView<Eigen::Upper>().toDenseMatrix().array() != 0).count());
}

namespace {

SymmetricMatrix from_edges(std::size_t n, const std::vector<MatrixEntry>& entries, Storage storage) {
    if (storage == Storage::Sparse) return SymmetricMatrix::sparse(n, entries);
    const auto k = static_cast<Eigen::Index>(n);
    DenseMatrix m = DenseMatrix::Zero(k, k);
    for (const auto& e : entries) {
        m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    }
    return SymmetricMatrix::dense(std::move(m));
}

}  // namespace

SymmetricMatrix adjacency_matrix(const ContactGraph& graph, Storage storage) {
    std::vector<MatrixEntry> entries;
    entries.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) entries.push_back({e.u, e.v, e.weight});
    return from_edges(graph.node_count(), entries, storage);
}

SymmetricMatrix normalized_adjacency(const ContactGraph& graph, Storage storage) {
    const auto& d = graph.degrees();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0)) throw DomainError(fmt::format("node '{}' has zero degree", graph.node_ids()[i]));
    }
    std::vector<MatrixEntry> entries;
    entries.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) entries.push_back({e.u, e.v, e.weight / std::sqrt(d[e.u] * d[e.v])});
    return from_edges(graph.node_count(), entries, storage);
}

SymmetricMatrix exponent_matrix(const ContactGraph& graph, Storage storage) {
    return graph.mode() == GraphMode::Weighted ? normalized_adjacency(graph, storage)
                                                : adjacency_matrix(graph, storage);
}

SpectralDecomposition eigen_decompose(const SymmetricMatrix& s) {
    require_finite(s);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(s.to_dense());
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

SymmetricMatrix matrix_exponential(const SymmetricMatrix& s) {
    if (s.size() == 0) throw DomainError("matrix exponential of an empty matrix");
    const auto dec = eigen_decompose(s);
    if (dec.eigenvalues.maxCoeff() > kMaxExponent) {
        throw NumericalError(fmt::format("exp overflows: largest eigenvalue {}", dec.eigenvalues.maxCoeff()));
    }
    const Vector scale = dec.eigenvalues.array().exp();
    DenseMatrix result = dec.eigenvectors * scale.asDiagonal() * dec.eigenvectors.transpose();
    return SymmetricMatrix::dense(std::move(result));
}

double spectral_radius(const SymmetricMatrix& s, const PowerIterationOptions& options) {
    require_finite(s);
    const std::size_t n = s.size();
    if (n == 0) return 0.0;
    std::mt19937_64 rng(options.seed);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    x.normalize();
    double rho = 0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        Vector y = s.multiply(x);
        const double next = y.norm();
        if (next == 0) return 0.0;
        if (it > 0 && std::abs(next - rho) <= options.tolerance * std::max(1.0, rho)) return next;
        rho = next;
        x = y / next;
    }
    throw NumericalError(fmt::format("power iteration did not converge in {} iterations", options.max_iterations));
}

double spectral_radius_exact(const SymmetricMatrix& s) {
    if (s.size() == 0) return 0.0;
    const auto dec = eigen_decompose(s);
    return std::max(std::abs(dec.eigenvalues.minCoeff()), std::abs(dec.eigenvalues.maxCoeff()));
}

Vector conjugate_gradient(const std::function<Vector(const Vector&)>& apply, const Vector& rhs,
                          const SolverOptions& options) {
    const auto n = static_cast<std::size_t>(rhs.size());
    const std::size_t max_it = options.max_iterations ? options.max_iterations : 10 * n + 100;
    const double target = options.relative_tolerance * rhs.norm();
    Vector x = Vector::Zero(rhs.size());
    if (target == 0) return x;
    Vector r = rhs;
    Vector p = r;
    double rr = r.squaredNorm();
    for (std::size_t it = 0; it < max_it; ++it) {
        const Vector ap = apply(p);
        const double pap = p.dot(ap);
        if (!(pap > 0) || !std::isfinite(pap)) throw NumericalError("conjugate gradient breakdown (operator not positive definite)");
        const double alpha = rr / pap;
        x += alpha * p;
        r -= alpha * ap;
        const double rr_next = r.squaredNorm();
        if (std::sqrt(rr_next) <= target) {
            // recursive residual drifts; confirm against the true one
            const Vector true_r = rhs - apply(x);
            if (true_r.norm() <= target) return x;
            r = true_r;
            p = r;
            rr = r.squaredNorm();
            continue;
        }
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    throw NumericalError(fmt::format("conjugate gradient did not converge in {} iterations", max_it));
}

ResolventSolver::ResolventSolver(SymmetricMatrix s, double gamma, std::optional<double> radius,
                                 const SolverOptions& options)
    : s_(std::move(s)), gamma_(gamma), options_(options) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw DomainError("resolvent parameter gamma must be >= 0");
    require_finite(s_);
    const double rho = radius ? *radius : spectral_radius(s_);
    if (gamma * rho >= 1.0) {
        throw DomainError(fmt::format("gamma * spectral radius = {} must be < 1", gamma * rho));
    }
    if (s_.is_dense()) {
        const auto n = static_cast<Eigen::Index>(s_.size());
        DenseMatrix m = DenseMatrix::Identity(n, n) - gamma * s_.dense_values();
        llt_.emplace(m);
        if (llt_->info() != Eigen::Success) throw DomainError("I - gamma S is not positive definite");
    }
}

Vector ResolventSolver::apply(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != s_.size()) throw DomainError("resolvent vector size mismatch");
    if (llt_) return llt_->solve(v);
    if (gamma_ == 0) return v;
    return conjugate_gradient([this](const Vector& x) -> Vector { return x - gamma_ * s_.multiply(x); }, v, options_);
}

DenseMatrix ResolventSolver::apply(const DenseMatrix& rhs) const {
    if (static_cast<std::size_t>(rhs.rows()) != s_.size()) throw DomainError("resolvent matrix size mismatch");
    if (llt_) return llt_->solve(rhs);
    DenseMatrix out(rhs.rows(), rhs.cols());
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) out.col(c) = apply(Vector(rhs.col(c)));
    return out;
}

Vector resolvent_apply(const SymmetricMatrix& s, double gamma, const Vector& v, std::optional<double> radius) {
    return ResolventSolver(s, gamma, radius).apply(v);
}

namespace {

struct LanczosState {
    DenseMatrix basis;          // columns q_0 .. q_{m-1}
    std::vector<double> alpha;
    std::vector<double> beta;   // beta[j] couples q_j and q_{j+1}
    double norm0 = 0;
};

// exp(T_m) e_1 for the current tridiagonal.
Vector exp_tridiagonal_e1(const std::vector<double>& alpha, const std::vector<double>& beta, std::size_t m) {
    Vector diag(static_cast<Eigen::Index>(m));
    Vector sub(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t i = 0; i < m; ++i) diag[static_cast<Eigen::Index>(i)] = alpha[i];
    for (std::size_t i = 0; i + 1 < m; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i];
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
    if (solver.eigenvalues().maxCoeff() > kMaxExponent) {
        throw NumericalError(fmt::format("exp overflows: Ritz value {}", solver.eigenvalues().maxCoeff()));
    }
    const Vector weights = solver.eigenvectors().row(0).transpose().array() * solver.eigenvalues().array().exp();
    return solver.eigenvectors() * weights;
}

// Runs Lanczos until `converged(coeffs, previous)` accepts exp(T_m) e_1.
template <typename Converged>
std::pair<LanczosState, Vector> run_lanczos(const SymmetricMatrix& s, const Vector& v, const KrylovOptions& opt,
                                            Converged converged) {
    const auto n = static_cast<Eigen::Index>(s.size());
    if (v.size() != n) throw DomainError("Krylov start vector size mismatch");
    require_finite(s);
    LanczosState st;
    st.norm0 = v.norm();
    const std::size_t max_steps = std::min<std::size_t>(opt.max_steps, static_cast<std::size_t>(n));
    st.basis.resize(n, static_cast<Eigen::Index>(max_steps));
    if (st.norm0 == 0) return {std::move(st), Vector()};
    st.basis.col(0) = v / st.norm0;

    Vector previous;
    double scale = 0;
    for (std::size_t j = 0; j < max_steps; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        Vector w = s.multiply(st.basis.col(jj));
        const double a = st.basis.col(jj).dot(w);
        st.alpha.push_back(a);
        w -= a * st.basis.col(jj);
        if (j > 0) w -= st.beta[j - 1] * st.basis.col(jj - 1);
        // two passes of classical Gram-Schmidt against the whole basis
        for (int pass = 0; pass < 2; ++pass) {
            const auto q = st.basis.leftCols(jj + 1);
            w -= q * (q.transpose() * w);
        }
        const double b = w.norm();
        scale = std::max({scale, std::abs(a), b});
        const std::size_t m = j + 1;
        Vector coeffs = exp_tridiagonal_e1(st.alpha, st.beta, m);
        const bool breakdown = b <= 1e-13 * std::max(scale, std::numeric_limits<double>::min());
        if (breakdown || (j > 0 && converged(coeffs, previous))) {
            st.basis.conservativeResize(n, static_cast<Eigen::Index>(m));
            return {std::move(st), std::move(coeffs)};
        }
        if (j + 1 == max_steps) break;
        st.beta.push_back(b);
        st.basis.col(jj + 1) = w / b;
        previous = std::move(coeffs);
    }
    if (max_steps == static_cast<std::size_t>(n)) {
        // full Krylov space: T_n is exactly similar to S
        Vector coeffs = exp_tridiagonal_e1(st.alpha, st.beta, st.alpha.size());
        return {std::move(st), std::move(coeffs)};
    }
    throw NumericalError(fmt::format("Lanczos did not converge in {} steps", max_steps));
}

}  // namespace

Vector exp_action(const SymmetricMatrix& s, const Vector& v, const KrylovOptions& options) {
    auto [st, coeffs] = run_lanczos(s, v, options, [&](const Vector& c, const Vector& prev) {
        Vector padded = Vector::Zero(c.size());
        padded.head(prev.size()) = prev;
        return (c - padded).norm() <= options.tolerance * c.norm();
    });
    if (st.norm0 == 0) return Vector::Zero(v.size());
    return st.norm0 * (st.basis * coeffs);
}

double exp_quadratic_form(const SymmetricMatrix& s, const Vector& v, const KrylovOptions& options) {
    auto [st, coeffs] = run_lanczos(s, v, options, [&](const Vector& c, const Vector& prev) {
        return std::abs(c[0] - prev[0]) <= options.tolerance * std::abs(c[0]);
    });
    if (st.norm0 == 0) return 0.0;
    return st.norm0 * st.norm0 * coeffs[0];
}

}  // namespace mobicomm
