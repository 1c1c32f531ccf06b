#pragma once

#include "mtd/graph.hpp"
#include "mtd/linalg.hpp"

#include <string>
#include <vector>

namespace mtd::design {

/// Nonlinearity selector resolved by the simulation catalog. `gain` is also
/// the sector slope bound: f^T f <= gain^2 y^T y for every catalog family.
struct NonlinearityRef {
    std::string id = "zero";
    double gain = 0.0;
};

/// Disturbance selector: amplitude * sin(angular_frequency * t) and friends.
struct DisturbanceRef {
    std::string id = "zero";
    double amplitude = 0.0;
    double angular_frequency = 0.0;
};

/// One agent of the interconnected MAS. C_y and the interconnection row are
/// simulation-only knowledge; the designer sees just the scalar bounds.
struct AgentModel {
    Matrix A;    // n_x x n_x
    Matrix B_u;  // n_x x n_u
    Matrix B_f;  // n_x x n_g
    Matrix B_d;  // n_x x n_d
    Matrix C_y;  // n_y x n_x
    NonlinearityRef f;
    DisturbanceRef d;

    int n_x() const { return static_cast<int>(A.rows()); }
    int n_u() const { return static_cast<int>(B_u.cols()); }
    int n_g() const { return static_cast<int>(B_f.cols()); }
    int n_d() const { return static_cast<int>(B_d.cols()); }
    int n_y() const { return static_cast<int>(C_y.rows()); }
};

/// Per-agent LQR weights plus the two Young's-inequality scalars shared by
/// all agents.
struct DesignWeights {
    Matrix Q;
    Matrix R;
    double a_f = 1.0;
    double a_d = 1.0;
};

struct SublayerValidation {
    Matrix Q_v_sigma;  // symmetrized validation matrix
    double min_eigenvalue = 0.0;
    bool pass = false;
};

struct LowDimValidation {
    std::vector<Matrix> Q_v;  // per agent
    std::vector<bool> agent_pass;
    Matrix Q_v_bar;  // diag{Q_vi}
    bool pass = false;
};

/// Output of the full design procedure for one control layer.
struct GainDesign {
    double mu_min = 0.0;
    double a_f = 1.0;
    double a_d = 1.0;
    std::vector<Matrix> Q;
    std::vector<Matrix> R;
    std::vector<Matrix> Q_f;
    std::vector<Matrix> P;  // ARE solutions, positive definite
    std::vector<Matrix> K;  // K_i = -mu_min R_i^{ -1} B_ui^T P_i
    std::vector<SublayerValidation> validation;  // one per sublayer
    LowDimValidation low_dim;
    double gamma_d = 0.0;  // ||P_bar B_d_bar||^2
};

/// Q_f = Q + (a_f * gamma_f * gamma_cy * ||A_a||^2 + a_d) I.
Matrix modified_weighting(const Matrix& Q, const graph::DesignerBounds& bounds, double a_f,
                          double a_d);

/// Unique stabilizing solution of
///   A^T P + P A + Q_f - mu^2 P B_u R^{-1} B_u^T P = 0
/// by Newton-Kleinman iteration (Kronecker-vectorized Lyapunov solves),
/// initialized with an eigenvalue-shift stabilizing gain.
Matrix solve_are(const Matrix& A, const Matrix& B_u, const Matrix& Q_f, const Matrix& R,
                 double mu_min);

/// Relative ARE residual ||A^T P + P A + Q_f - mu^2 P B R^{-1} B^T P|| / ||Q_f||.
double are_residual(const Matrix& A, const Matrix& B_u, const Matrix& Q_f, const Matrix& R,
                    double mu_min, const Matrix& P);

Matrix compute_gain(const Matrix& P, const Matrix& R, const Matrix& B_u, double mu_min);

/// Validation condition for sublayer sigma (0-based index into the layer):
///   Q_v_sigma = Q_bar + K_bar^T (R_bar + 2 R_bar E_sigma) K_bar
///               - (1/a_f) P_bar B_f_bar B_f_bar^T P_bar,
/// with E_sigma = (H_sigma / mu_min - I) (x) I_{n_u} required PSD.
/// Pass iff the smallest eigenvalue of the symmetrized matrix is positive.
SublayerValidation validation_matrix(const GainDesign& gains,
                                     const std::vector<AgentModel>& agents,
                                     const graph::ControlLayer& layer, int sigma);

/// Per-agent reduced validation conditions Q_vi = Q_i + K_i^T R_i K_i
/// - (1/a_f) P_i B_fi B_fi^T P_i. When verify_hypothesis is set, requires
/// either R_i = r I for all i or sym(R_bar E_sigma) PSD for every sigma.
LowDimValidation validation_low_dimension(const GainDesign& gains,
                                          const std::vector<AgentModel>& agents,
                                          bool verify_hypothesis = false,
                                          const graph::ControlLayer* layer = nullptr);

struct OptimalityResiduals {
    double gradient = 0.0;     // 2 v^T R_bar + mu V_x^T B_u_bar
    double hjb = 0.0;          // x^T Q_f x + v^T R v + V_x^T (A x + mu B_u v)
};

/// Max relative residuals of the two optimality identities over the samples.
OptimalityResiduals check_optimality_identities(const GainDesign& gains,
                                                const std::vector<AgentModel>& agents,
                                                const std::vector<Vector>& samples);

/// Steps 2-3 of the design procedure for every agent, including the per-
/// sublayer validation, the low-dimension variant and gamma_d.
GainDesign run_design_procedure(const std::vector<AgentModel>& agents,
                                const graph::DesignerBounds& bounds,
                                const std::vector<DesignWeights>& weights,
                                const graph::ControlLayer& layer);

/// Stacked block-diagonal matrices of the closed loop; built on demand.
struct Aggregate {
    Matrix A;    // diag{A_i}
    Matrix B_u;  // diag{B_ui}
    Matrix B_f;
    Matrix B_d;
    Matrix C_y;
    Matrix K;    // diag{K_i}
    Matrix P;    // diag{P_i}
    Matrix Q_f;  // diag{Q_fi}
    Matrix R;    // diag{R_i}
    Matrix Q;    // diag{Q_i}
};

Aggregate build_aggregate(const std::vector<AgentModel>& agents, const GainDesign& gains);

}  // namespace mtd::design
