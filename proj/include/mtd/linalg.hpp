#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mtd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Eigendecomposition of a symmetric matrix.
struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi rotations; robust for the small dense matrices used here.
/// Sweeps until the off-diagonal Frobenius norm falls below tol * ||H||_F.
SymmetricEigen jacobi_eigen(const Matrix& H, double tol = 1e-12);

/// Ascending eigenvalues of a symmetric matrix (Jacobi, eigenvalues only).
Vector symmetric_eigenvalues(const Matrix& H);

bool is_symmetric(const Matrix& M, double rel_tol = 1e-12);

/// Largest singular value via power iteration on A^T A.
double operator_norm(const Matrix& A);

/// Positive definiteness by Cholesky with a pivot tolerance relative to
/// the largest diagonal entry.
bool is_positive_definite(const Matrix& M, double pivot_tol = 1e-12);

Matrix kron(const Matrix& A, const Matrix& B);

Matrix block_diag(const std::vector<Matrix>& blocks);

/// Solves A^T X + X A + C = 0 by Kronecker vectorization (unique solution
/// requires lambda_i(A) + lambda_j(A) != 0). Throws NumericalFailure when the
/// linear system is effectively singular.
Matrix solve_lyapunov(const Matrix& A, const Matrix& C);

/// Real parts of general (possibly nonsymmetric) eigenvalues, max over all.
double max_real_eigenvalue(const Matrix& A);

bool is_hurwitz(const Matrix& A, double margin = 0.0);

/// splitmix64: tiny deterministic PRNG so that seeded runs are reproducible
/// across platforms (std:: distributions are implementation-defined).
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

}  // namespace linalg
}  // namespace mtd
