#include "mtd/design.hpp"

#include "mtd/errors.hpp"

#include <cmath>
#include <string>

namespace mtd::design {

using linalg::block_diag;
using linalg::is_positive_definite;
using linalg::jacobi_eigen;
using linalg::kron;
using linalg::solve_lyapunov;

Matrix modified_weighting(const Matrix& Q, const graph::DesignerBounds& bounds, double a_f,
                          double a_d) {
    if (a_f <= 0.0 || a_d <= 0.0) {
        throw Error(ErrorCode::SchemaViolation, "modified_weighting: a_f and a_d must be positive");
    }
    if (bounds.gamma_cy <= 0.0 || bounds.gamma_f <= 0.0 || bounds.norm_Aa < 0.0) {
        throw Error(ErrorCode::SchemaViolation, "modified_weighting: bounds must be positive");
    }
    if (!is_positive_definite(Q)) {
        throw Error(ErrorCode::NonPositiveDefinite, "modified_weighting: Q is not positive definite");
    }
    const double shift = a_f * bounds.gamma_f * bounds.gamma_cy * bounds.norm_Aa * bounds.norm_Aa + a_d;
    return Q + shift * Matrix::Identity(Q.rows(), Q.cols());
}

namespace {

/// Stabilizing initial gain by eigenvalue shift: with beta exceeding the
/// largest real part of A's spectrum, Z solving
///   (A + beta I) Z + Z (A + beta I)^T = 2 B B^T
/// is PSD and K0 = -B^T Z^+ places A + B K0 in the open left half plane
/// (uncontrollable-but-stable modes stay where they are).
Matrix shift_feedback_gain(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (linalg::is_hurwitz(A)) return Matrix::Zero(m, n);

    double beta = A.norm() + 0.5;
    for (int attempt = 0; attempt < 4; ++attempt) {
        const Matrix As = A + beta * Matrix::Identity(n, n);
        Matrix Z;
        try {
            Z = solve_lyapunov(As.transpose(), -2.0 * B * B.transpose());
        } catch (const Error&) {
            beta *= 4.0;
            continue;
        }
        const auto eig = jacobi_eigen(Z);
        const double cutoff = 1e-12 * std::max(eig.values.cwiseAbs().maxCoeff(), 1e-300);
        Matrix Zpinv = Matrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (eig.values(k) > cutoff) {
                Zpinv += eig.vectors.col(k) * eig.vectors.col(k).transpose() / eig.values(k);
            }
        }
        const Matrix K0 = -B.transpose() * Zpinv;
        if (linalg::is_hurwitz(A + B * K0)) return K0;
        beta *= 4.0;
    }
    throw Error(ErrorCode::NoStabilizingSolution,
                "no stabilizing initial gain found; (A, mu B_u) may not be stabilizable");
}

}  // namespace

double are_residual(const Matrix& A, const Matrix& B_u, const Matrix& Q_f, const Matrix& R,
                    double mu_min, const Matrix& P) {
    const Matrix Bt = mu_min * B_u;
    Eigen::LLT<Matrix> llt(R);
    const Matrix res = A.transpose() * P + P * A + Q_f - P * Bt * llt.solve(Bt.transpose() * P);
    return res.norm() / std::max(Q_f.norm(), 1e-300);
}

Matrix solve_are(const Matrix& A, const Matrix& B_u, const Matrix& Q_f, const Matrix& R,
                 double mu_min) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B_u.rows() != n || Q_f.rows() != n || Q_f.cols() != n ||
        R.rows() != B_u.cols() || R.cols() != B_u.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "solve_are: inconsistent dimensions");
    }
    if (mu_min <= 0.0) {
        throw Error(ErrorCode::NonPositiveMuMin, "solve_are: mu_min must be positive");
    }
    if (!is_positive_definite(Q_f)) {
        throw Error(ErrorCode::NonPositiveDefinite, "solve_are: Q_f is not positive definite");
    }
    if (!is_positive_definite(R)) {
        throw Error(ErrorCode::NonPositiveDefinite, "solve_are: R is not positive definite");
    }

    const Matrix Bt = mu_min * B_u;
    Eigen::LLT<Matrix> llt_R(R);

    Matrix K = shift_feedback_gain(A, Bt);
    Matrix P = Matrix::Zero(n, n);
    double res = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    for (int it = 0; it < 100; ++it) {
        const Matrix A_cl = A + Bt * K;
        Matrix P_next;
        try {
            P_next = solve_lyapunov(A_cl, Q_f + K.transpose() * R * K);
        } catch (const Error&) {
            throw Error(ErrorCode::NoStabilizingSolution,
                        "solve_are: Lyapunov step failed (iterate lost stability)");
        }
        P = P_next;
        K = -llt_R.solve(Bt.transpose() * P);
        const double res_next = are_residual(A, B_u, Q_f, R, mu_min, P);
        stagnant = (res_next >= res * 0.999) ? stagnant + 1 : 0;
        res = res_next;
        if (res <= 1e-10 || stagnant >= 3) break;
    }

    P = ((P + P.transpose()) / 2.0).eval();
    if (res > 1e-8 || !is_positive_definite(P) || !linalg::is_hurwitz(A + Bt * K)) {
        throw Error(ErrorCode::NoStabilizingSolution,
                    "solve_are: no stabilizing positive definite solution (residual " +
                        std::to_string(res) + "); revise the sublayer topology for a larger mu_min");
    }
    return P;
}

Matrix compute_gain(const Matrix& P, const Matrix& R, const Matrix& B_u, double mu_min) {
    Eigen::LLT<Matrix> llt(R);
    return -mu_min * llt.solve(B_u.transpose() * P);
}

namespace {

Matrix ebar(const graph::ControlLayer& layer, int sigma, int n_u, double mu_min) {
    const Matrix& H = layer.sublayers[static_cast<std::size_t>(sigma)].laplacian;
    const Eigen::Index N = H.rows();
    const Matrix E_nodes = H / mu_min - Matrix::Identity(N, N);
    const Matrix E = kron(E_nodes, Matrix::Identity(n_u, n_u));
    const double min_eig = linalg::symmetric_eigenvalues((E + E.transpose()) / 2.0)(0);
    if (min_eig < -1e-10) {
        throw Error(ErrorCode::EbarNotPsd,
                    "sublayer " + std::to_string(sigma + 1) + ": H/mu_min - I has eigenvalue " +
                        std::to_string(min_eig) + " < 0; mu_min is inconsistent with the layer");
    }
    return E;
}

}  // namespace

SublayerValidation validation_matrix(const GainDesign& gains, const std::vector<AgentModel>& agents,
                                     const graph::ControlLayer& layer, int sigma) {
    const int n_u = agents.front().n_u();
    const Matrix E = ebar(layer, sigma, n_u, gains.mu_min);

    std::vector<Matrix> Qs, Rs, Ks, Ps, Bfs;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        Qs.push_back(gains.Q[i]);
        Rs.push_back(gains.R[i]);
        Ks.push_back(gains.K[i]);
        Ps.push_back(gains.P[i]);
        Bfs.push_back(agents[i].B_f);
    }
    const Matrix Qb = block_diag(Qs), Rb = block_diag(Rs), Kb = block_diag(Ks),
                 Pb = block_diag(Ps), Bf = block_diag(Bfs);

    Matrix M = Qb + Kb.transpose() * (Rb + 2.0 * Rb * E) * Kb -
               (1.0 / gains.a_f) * Pb * Bf * Bf.transpose() * Pb;
    M = ((M + M.transpose()) / 2.0).eval();

    SublayerValidation v;
    v.Q_v_sigma = M;
    v.min_eigenvalue = linalg::symmetric_eigenvalues(M)(0);
    v.pass = v.min_eigenvalue > 0.0;
    return v;
}

LowDimValidation validation_low_dimension(const GainDesign& gains,
                                          const std::vector<AgentModel>& agents,
                                          bool verify_hypothesis, const graph::ControlLayer* layer) {
    if (verify_hypothesis) {
        bool uniform_scaled_identity = true;
        const Matrix& R0 = gains.R.front();
        for (const auto& R : gains.R) {
            if (R.rows() != R0.rows() ||
                (R - R0(0, 0) * Matrix::Identity(R.rows(), R.cols())).norm() > 1e-12 * (1.0 + R0.norm())) {
                uniform_scaled_identity = false;
            }
        }
        if (!uniform_scaled_identity) {
            if (layer == nullptr) {
                throw Error(ErrorCode::HypothesisNotVerified,
                            "low-dimension validation: hypothesis check requires the control layer");
            }
            std::vector<Matrix> Rs;
            for (const auto& R : gains.R) Rs.push_back(R);
            const Matrix Rb = block_diag(Rs);
            const int n_u = agents.front().n_u();
            for (std::size_t s = 0; s < layer->sublayers.size(); ++s) {
                const Matrix E = ebar(*layer, static_cast<int>(s), n_u, gains.mu_min);
                const Matrix S = (Rb * E + (Rb * E).transpose()) / 2.0;
                if (linalg::symmetric_eigenvalues(S)(0) < -1e-10) {
                    throw Error(ErrorCode::HypothesisNotVerified,
                                "low-dimension validation: sym(R E) not PSD for sublayer " +
                                    std::to_string(s + 1));
                }
            }
        }
    }

    LowDimValidation out;
    out.pass = true;
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        Matrix Qv = gains.Q[i] + gains.K[i].transpose() * gains.R[i] * gains.K[i] -
                    (1.0 / gains.a_f) * gains.P[i] * agents[i].B_f * agents[i].B_f.transpose() *
                        gains.P[i];
        Qv = ((Qv + Qv.transpose()) / 2.0).eval();
        const bool ok = linalg::symmetric_eigenvalues(Qv)(0) > 0.0;
        out.Q_v.push_back(Qv);
        out.agent_pass.push_back(ok);
        out.pass = out.pass && ok;
        blocks.push_back(Qv);
    }
    out.Q_v_bar = block_diag(blocks);
    return out;
}

OptimalityResiduals check_optimality_identities(const GainDesign& gains,
                                                const std::vector<AgentModel>& agents,
                                                const std::vector<Vector>& samples) {
    const Aggregate agg = build_aggregate(agents, gains);
    const double mu = gains.mu_min;

    OptimalityResiduals out;
    for (const Vector& x : samples) {
        const Vector v = agg.K * x;
        const Vector Vx = 2.0 * agg.P * x;

        const Vector grad = 2.0 * (agg.R * v) + mu * (agg.B_u.transpose() * Vx);
        const double grad_scale =
            std::max(1.0, 2.0 * (agg.R * v).norm() + mu * (agg.B_u.transpose() * Vx).norm());

        const double t1 = x.dot(agg.Q_f * x);
        const double t2 = v.dot(agg.R * v);
        const double t3 = Vx.dot(agg.A * x + mu * (agg.B_u * v));
        const double hjb = t1 + t2 + t3;
        const double hjb_scale = std::max(1.0, std::abs(t1) + std::abs(t2) + std::abs(t3));

        out.gradient = std::max(out.gradient, grad.norm() / grad_scale);
        out.hjb = std::max(out.hjb, std::abs(hjb) / hjb_scale);
    }
    return out;
}

GainDesign run_design_procedure(const std::vector<AgentModel>& agents,
                                const graph::DesignerBounds& bounds,
                                const std::vector<DesignWeights>& weights,
                                const graph::ControlLayer& layer) {
    if (agents.empty() || weights.size() != agents.size()) {
        throw Error(ErrorCode::DimensionMismatch, "design: agents and weights sizes disagree");
    }
    const int n_x = agents.front().n_x();
    const int n_u = agents.front().n_u();
    for (const auto& a : agents) {
        if (a.n_x() != n_x || a.n_u() != n_u) {
            throw Error(ErrorCode::DimensionMismatch,
                        "design: all agents must share n_x and n_u (Kronecker aggregation)");
        }
        const double cy = linalg::operator_norm(a.C_y);
        if (cy * cy > bounds.gamma_cy * (1.0 + 1e-9)) {
            throw Error(ErrorCode::SchemaViolation,
                        "design: an agent violates ||C_y||^2 <= gamma_cy of its designer bounds");
        }
    }

    GainDesign g;
    g.mu_min = layer.mu_min;
    g.a_f = weights.front().a_f;
    g.a_d = weights.front().a_d;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& w = weights[i];
        if (w.a_f != g.a_f || w.a_d != g.a_d) {
            throw Error(ErrorCode::SchemaViolation, "design: a_f and a_d must be shared by all agents");
        }
        const Matrix Qf = modified_weighting(w.Q, bounds, w.a_f, w.a_d);
        const Matrix P = solve_are(agents[i].A, agents[i].B_u, Qf, w.R, g.mu_min);
        g.Q.push_back(w.Q);
        g.R.push_back(w.R);
        g.Q_f.push_back(Qf);
        g.P.push_back(P);
        g.K.push_back(compute_gain(P, w.R, agents[i].B_u, g.mu_min));
    }

    for (std::size_t s = 0; s < layer.sublayers.size(); ++s) {
        g.validation.push_back(validation_matrix(g, agents, layer, static_cast<int>(s)));
    }
    g.low_dim = validation_low_dimension(g, agents);

    std::vector<Matrix> Ps, Bds;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        Ps.push_back(g.P[i]);
        Bds.push_back(agents[i].B_d);
    }
    // Young's inequality constant for the disturbance channel; the 1/a_d
    // factor makes the decay bound valid for any positive a_d.
    const double nrm = linalg::operator_norm(block_diag(Ps) * block_diag(Bds));
    g.gamma_d = nrm * nrm / g.a_d;
    return g;
}

Aggregate build_aggregate(const std::vector<AgentModel>& agents, const GainDesign& gains) {
    std::vector<Matrix> As, Bus, Bfs, Bds, Cys, Ks, Ps, Qfs, Rs, Qs;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        As.push_back(agents[i].A);
        Bus.push_back(agents[i].B_u);
        Bfs.push_back(agents[i].B_f);
        Bds.push_back(agents[i].B_d);
        Cys.push_back(agents[i].C_y);
        Ks.push_back(gains.K[i]);
        Ps.push_back(gains.P[i]);
        Qfs.push_back(gains.Q_f[i]);
        Rs.push_back(gains.R[i]);
        Qs.push_back(gains.Q[i]);
    }
    Aggregate agg;
    agg.A = block_diag(As);
    agg.B_u = block_diag(Bus);
    agg.B_f = block_diag(Bfs);
    agg.B_d = block_diag(Bds);
    agg.C_y = block_diag(Cys);
    agg.K = block_diag(Ks);
    agg.P = block_diag(Ps);
    agg.Q_f = block_diag(Qfs);
    agg.R = block_diag(Rs);
    agg.Q = block_diag(Qs);
    return agg;
}

}  // namespace mtd::design
