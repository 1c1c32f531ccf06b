#include "mtd/linalg.hpp"

#include "mtd/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtd::linalg {

bool is_symmetric(const Matrix& M, double rel_tol) {
    if (M.rows() != M.cols()) return false;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SymmetricEigen jacobi_eigen(const Matrix& H, double tol) {
    if (!is_symmetric(H, 1e-10)) {
        throw Error(ErrorCode::NotSymmetric, "jacobi_eigen: matrix is not symmetric");
    }
    const Eigen::Index n = H.rows();
    Matrix A = (H + H.transpose()) / 2.0;
    Matrix V = Matrix::Identity(n, n);

    auto off_norm = [&A, n]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * A(i, j) * A(i, j);
        return std::sqrt(s);
    };

    const double h_norm = std::max(A.norm(), 1e-300);
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > tol * h_norm; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&A](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = V.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

Vector symmetric_eigenvalues(const Matrix& H) { return jacobi_eigen(H).values; }

double operator_norm(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    const Matrix M = A.transpose() * A;
    const Eigen::Index n = M.rows();
    if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i);
    v.normalize();

    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vector w = M * v;
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        w /= wn;
        const double next = w.dot(M * w);
        const bool settled = std::abs(next - lambda) <= 5e-14 * std::max(std::abs(next), 1e-300);
        lambda = next;
        v = w;
        if (settled && (M * v - lambda * v).norm() <= 1e-11 * std::max(lambda, 1e-300)) break;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

bool is_positive_definite(const Matrix& M, double pivot_tol) {
    if (M.rows() != M.cols() || M.rows() == 0) return false;
    if (!is_symmetric(M, 1e-10)) return false;
    const Eigen::Index n = M.rows();
    Matrix L = Matrix::Zero(n, n);
    const double scale = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = M(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= pivot_tol * scale) return false;
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = M(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return true;
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    Eigen::Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& C) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || C.rows() != n || C.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "solve_lyapunov: incompatible dimensions");
    }
    const Matrix I = Matrix::Identity(n, n);
    // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X)
    const Matrix K = kron(I, A.transpose()) + kron(A.transpose(), I);
    Vector rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -C.col(j);

    Eigen::PartialPivLU<Matrix> lu(K);
    Vector x = lu.solve(rhs);
    Matrix X(n, n);
    for (Eigen::Index j = 0; j < n; ++j) X.col(j) = x.segment(j * n, n);
    X = ((X + X.transpose()) / 2.0).eval();

    const double resid = (A.transpose() * X + X * A + C).norm();
    const double scale = std::max({C.norm(), X.norm() * A.norm(), 1.0});
    if (!X.allFinite() || resid > 1e-8 * scale) {
        throw Error(ErrorCode::NumericalFailure, "solve_lyapunov: singular or ill-conditioned system");
    }
    return X;
}

double max_real_eigenvalue(const Matrix& A) {
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& A, double margin) { return max_real_eigenvalue(A) < -margin; }

}  // namespace mtd::linalg
