#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mobicomm/contact_graph.hpp"

namespace mobicomm {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseUpper = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Storage { Dense, Sparse };

struct MatrixEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0;
};

/// Real symmetric matrix. Only the upper triangle is authoritative: the
/// dense form mirrors it on construction, the sparse form stores it alone
/// and multiplies through a self-adjoint view.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    /// Uses the upper triangle (diagonal included) of `values`.
    static SymmetricMatrix dense(DenseMatrix values);
    /// Entries may lie in either triangle; duplicates are summed.
    static SymmetricMatrix sparse(std::size_t n, const std::vector<MatrixEntry>& entries);
    static SymmetricMatrix zero(std::size_t n, Storage storage);

    std::size_t size() const;
    bool is_dense() const { return std::holds_alternative<DenseMatrix>(data_); }

    Vector multiply(const Vector& x) const;
    double entry(std::size_t i, std::size_t j) const;
    DenseMatrix to_dense() const;
    double frobenius_norm() const;
    /// Structural non-zeros of the upper triangle.
    std::size_t upper_nonzeros() const;

    const DenseMatrix& dense_values() const { return std::get<DenseMatrix>(data_); }
    const SparseUpper& sparse_upper() const { return std::get<SparseUpper>(data_); }

private:
    std::variant<DenseMatrix, SparseUpper> data_;
};

/// Plain adjacency a_ij = w_ij (1 in Unweighted mode).
SymmetricMatrix adjacency_matrix(const ContactGraph& graph, Storage storage);

/// a_ij / sqrt(d_i d_j). DomainError when some node has zero degree.
SymmetricMatrix normalized_adjacency(const ContactGraph& graph, Storage storage);

/// The matrix whose exponential defines centrality and communicability:
/// the degree-normalized adjacency for weighted graphs, A itself otherwise.
SymmetricMatrix exponent_matrix(const ContactGraph& graph, Storage storage);

struct SpectralDecomposition {
    Vector eigenvalues;       // ascending
    DenseMatrix eigenvectors; // orthonormal columns
};

SpectralDecomposition eigen_decompose(const SymmetricMatrix& s);

/// Q exp(Lambda) Q^T. NumericalError on non-finite input or overflow.
SymmetricMatrix matrix_exponential(const SymmetricMatrix& s);

struct PowerIterationOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 10'000;
    std::uint64_t seed = 0x5eed;
};

/// max |lambda| by power iteration from a seeded random positive start,
/// stopping when |rho_{t+1} - rho_t| <= tol * max(1, rho_t).
/// NumericalError when max_iterations is exhausted.
double spectral_radius(const SymmetricMatrix& s, const PowerIterationOptions& options = {});

/// max |lambda| from a dense eigensolve.
double spectral_radius_exact(const SymmetricMatrix& s);

struct SolverOptions {
    double relative_tolerance = 1e-10;
    std::size_t max_iterations = 0;  // 0: 10 n + 100
};

/// Conjugate gradient for a symmetric positive definite operator.
/// NumericalError on breakdown or non-convergence.
Vector conjugate_gradient(const std::function<Vector(const Vector&)>& apply, const Vector& rhs,
                          const SolverOptions& options = {});

/// Applies (I - gamma S)^{-1} to vectors. Dense matrices are factorized
/// once (Cholesky); sparse ones are solved with conjugate gradients.
class ResolventSolver {
public:
    /// `radius` is rho(S) when already known; otherwise it is computed.
    /// DomainError unless 0 <= gamma and gamma * rho(S) < 1.
    ResolventSolver(SymmetricMatrix s, double gamma, std::optional<double> radius = std::nullopt,
                    const SolverOptions& options = {});

    Vector apply(const Vector& v) const;
    /// Solves for every column of `rhs`.
    DenseMatrix apply(const DenseMatrix& rhs) const;

private:
    SymmetricMatrix s_;
    double gamma_;
    SolverOptions options_;
    std::optional<Eigen::LLT<DenseMatrix>> llt_;
};

/// x with (I - gamma S) x = v.
Vector resolvent_apply(const SymmetricMatrix& s, double gamma, const Vector& v,
                       std::optional<double> radius = std::nullopt);

struct KrylovOptions {
    double tolerance = 1e-12;
    std::size_t max_steps = 300;
};

/// exp(S) v by Lanczos with full reorthogonalization.
Vector exp_action(const SymmetricMatrix& s, const Vector& v, const KrylovOptions& options = {});

/// v^T exp(S) v by Lanczos (Gauss) quadrature.
double exp_quadratic_form(const SymmetricMatrix& s, const Vector& v, const KrylovOptions& options = {});

}  // namespace mobicomm
