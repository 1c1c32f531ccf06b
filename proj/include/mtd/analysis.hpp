#pragma once

#include "mtd/design.hpp"
#include "mtd/sim.hpp"

#include <string>
#include <vector>

namespace mtd::analysis {

enum class Verdict { Exponential, IssBounded, Diverged, Indeterminate };

const char* verdict_name(Verdict v);

struct DecayViolation {
    double t = 0.0;
    double margin = 0.0;  // amount by which Vdot exceeded the bound
};

struct ExponentialConstants {
    double kappa_e = 1.0;  // sqrt(lambda_max(P) / lambda_min(P))
    double sigma_e = 0.0;  // lambda_min(Q_v) / (2 lambda_max(P))
};

struct IssReport {
    std::vector<double> lyapunov;  // V(t) = x^T P x
    std::vector<DecayViolation> decay_violations;
    int decay_points_checked = 0;
    int attacked_points = 0;  // grid points excluded from the decay assertion
    ExponentialConstants constants;
    double gamma_d = 0.0;
    double sup_tail_norm = 0.0;      // sup ||x|| over the trailing half horizon
    double disturbance_sup = 0.0;    // ||d||_inf over the run
    double ultimate_bound = 0.0;     // threshold used for the iss_bounded verdict
    Verdict verdict = Verdict::Indeterminate;

    std::string summary() const;
};

/// V(t) = x(t)^T P x(t) along the stored trajectory.
std::vector<double> lyapunov_trace(const sim::SimulationResult& result, const Matrix& P_bar);

/// Central-difference Vdot compared against -x^T Q_v_sigma x + gamma_d ||d||^2
/// + tolerance at interior grid points whose stencil lies in unattacked
/// regimes. At a switch instant the bound of either adjacent mode is provable
/// for the two half-intervals, so the laxer of the two is used.
std::vector<DecayViolation> decay_check(const sim::SimulationResult& result,
                                        const design::GainDesign& gains, double tolerance,
                                        int* points_checked = nullptr);

/// Envelope constants from P and a common (sigma-independent) Q_v.
ExponentialConstants exponential_constants(const Matrix& P_bar, const Matrix& Q_v_bar);

struct AnalysisOptions {
    double decay_tol_factor = 1e-6;  // tolerance = factor * max V
    double envelope_tol = 1e-3;      // exponential verdict slack
    double ultimate_multiple = 0.0;  // 0: derive 2 * kappa_e * sqrt(gamma_d / lambda_min(Q_v))
};

/// Verdict rules: diverged when the ceiling was hit; exponential when d was
/// identically zero and the kappa_e exp(-sigma_e t) envelope holds on the
/// full grid; iss_bounded when the trailing-half-horizon state norm stays
/// under the ultimate bound; indeterminate otherwise.
Verdict verdict(const sim::SimulationResult& result, const ExponentialConstants& constants,
                double envelope_tol, double ultimate_bound, double* sup_tail = nullptr,
                double* d_sup = nullptr);

/// Full post-processing of one run against its design.
IssReport analyze(const sim::SimulationResult& result, const design::GainDesign& gains,
                  const AnalysisOptions& options = {});

}  // namespace mtd::analysis
