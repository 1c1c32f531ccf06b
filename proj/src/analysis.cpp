#include "mtd/analysis.hpp"

#include "mtd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtd::analysis {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Exponential: return "exponential";
        case Verdict::IssBounded: return "iss_bounded";
        case Verdict::Diverged: return "diverged";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

std::vector<double> lyapunov_trace(const sim::SimulationResult& result, const Matrix& P_bar) {
    if (result.states.cols() != P_bar.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "lyapunov_trace: P size disagrees with the states");
    }
    std::vector<double> V(static_cast<std::size_t>(result.samples()));
    for (int k = 0; k < result.samples(); ++k) {
        const Vector x = result.states.row(k).transpose();
        V[static_cast<std::size_t>(k)] = x.dot(P_bar * x);
    }
    return V;
}

std::vector<DecayViolation> decay_check(const sim::SimulationResult& result,
                                        const design::GainDesign& gains, double tolerance,
                                        int* points_checked) {
    const int n = result.samples();
    std::vector<DecayViolation> violations;
    if (points_checked) *points_checked = 0;
    if (n < 3) return violations;

    std::vector<Matrix> Ps;
    for (const auto& P : gains.P) Ps.push_back(P);
    const Matrix P_bar = linalg::block_diag(Ps);
    const std::vector<double> V = lyapunov_trace(result, P_bar);

    for (int k = 1; k + 1 < n; ++k) {
        // The stencil covers [t_{k-1}, t_{k+1}); regimes at k-1 and k govern it.
        if (result.attack_active[static_cast<std::size_t>(k - 1)] ||
            result.attack_active[static_cast<std::size_t>(k)]) {
            continue;
        }
        const double h_prev = result.times[static_cast<std::size_t>(k)] - result.times[static_cast<std::size_t>(k - 1)];
        const double h_next = result.times[static_cast<std::size_t>(k + 1)] - result.times[static_cast<std::size_t>(k)];
        const double vdot = (V[static_cast<std::size_t>(k + 1)] - V[static_cast<std::size_t>(k - 1)]) / (h_prev + h_next);

        const Vector x = result.states.row(k).transpose();
        const Vector d = result.disturbances.row(k).transpose();
        const int mode_a = result.sigma[static_cast<std::size_t>(k - 1)];
        const int mode_b = result.sigma[static_cast<std::size_t>(k)];
        const double quad_a = x.dot(gains.validation[static_cast<std::size_t>(mode_a)].Q_v_sigma * x);
        const double quad_b = x.dot(gains.validation[static_cast<std::size_t>(mode_b)].Q_v_sigma * x);
        const double bound = -std::min(quad_a, quad_b) + gains.gamma_d * d.squaredNorm() + tolerance;

        if (points_checked) ++*points_checked;
        if (vdot > bound) {
            violations.push_back({result.times[static_cast<std::size_t>(k)], vdot - bound});
        }
    }
    return violations;
}

ExponentialConstants exponential_constants(const Matrix& P_bar, const Matrix& Q_v_bar) {
    if (!linalg::is_positive_definite(P_bar)) {
        throw Error(ErrorCode::NonPositiveDefinite, "exponential_constants: P is not positive definite");
    }
    if (!linalg::is_positive_definite(Q_v_bar)) {
        throw Error(ErrorCode::NonPositiveDefinite, "exponential_constants: Q_v is not positive definite");
    }
    const Vector ep = linalg::symmetric_eigenvalues(P_bar);
    const Vector eq = linalg::symmetric_eigenvalues(Q_v_bar);
    ExponentialConstants c;
    c.kappa_e = std::sqrt(ep(ep.size() - 1) / ep(0));
    c.sigma_e = eq(0) / (2.0 * ep(ep.size() - 1));
    return c;
}

Verdict verdict(const sim::SimulationResult& result, const ExponentialConstants& constants,
                double envelope_tol, double ultimate_bound, double* sup_tail, double* d_sup) {
    if (result.diverged) return Verdict::Diverged;
    const int n = result.samples();
    if (n == 0) return Verdict::Indeterminate;

    double d_inf = 0.0;
    for (int k = 0; k < n; ++k) {
        d_inf = std::max(d_inf, result.disturbances.row(k).norm());
    }
    if (d_sup) *d_sup = d_inf;

    const double t_end = result.times.back();
    double tail = 0.0;
    for (int k = 0; k < n; ++k) {
        if (result.times[static_cast<std::size_t>(k)] >= t_end / 2.0) {
            tail = std::max(tail, result.states.row(k).norm());
        }
    }
    if (sup_tail) *sup_tail = tail;

    if (d_inf == 0.0) {
        const double x0 = result.states.row(0).norm();
        bool envelope = true;
        for (int k = 0; k < n && envelope; ++k) {
            const double bound =
                constants.kappa_e * std::exp(-constants.sigma_e * result.times[static_cast<std::size_t>(k)]) * x0 *
                (1.0 + envelope_tol);
            if (result.states.row(k).norm() > bound) envelope = false;
        }
        if (envelope) return Verdict::Exponential;
    }
    if (d_inf > 0.0 && tail <= ultimate_bound * d_inf) return Verdict::IssBounded;
    return Verdict::Indeterminate;
}

IssReport analyze(const sim::SimulationResult& result, const design::GainDesign& gains,
                  const AnalysisOptions& options) {
    IssReport report;

    std::vector<Matrix> Ps;
    for (const auto& P : gains.P) Ps.push_back(P);
    const Matrix P_bar = linalg::block_diag(Ps);
    report.lyapunov = lyapunov_trace(result, P_bar);
    report.gamma_d = gains.gamma_d;

    report.constants = exponential_constants(P_bar, gains.low_dim.Q_v_bar);

    const double v_max = report.lyapunov.empty()
                             ? 0.0
                             : *std::max_element(report.lyapunov.begin(), report.lyapunov.end());
    report.decay_violations =
        decay_check(result, gains, options.decay_tol_factor * v_max, &report.decay_points_checked);
    for (auto flag : result.attack_active) report.attacked_points += (flag != 0);

    double ultimate = options.ultimate_multiple;
    if (ultimate <= 0.0) {
        const double lam_qv = linalg::symmetric_eigenvalues(gains.low_dim.Q_v_bar)(0);
        ultimate = 2.0 * report.constants.kappa_e * std::sqrt(gains.gamma_d / lam_qv);
    }
    report.verdict = verdict(result, report.constants, options.envelope_tol, ultimate,
                             &report.sup_tail_norm, &report.disturbance_sup);
    report.ultimate_bound = ultimate;
    return report;
}

std::string IssReport::summary() const {
    std::ostringstream os;
    os << "verdict: " << verdict_name(verdict) << "\n";
    os << "kappa_e: " << constants.kappa_e << "\n";
    os << "sigma_e: " << constants.sigma_e << "\n";
    os << "gamma_d: " << gamma_d << "\n";
    os << "decay checked points: " << decay_points_checked << "\n";
    os << "decay violations: " << decay_violations.size() << "\n";
    os << "attacked grid points (excluded from the decay assertion): " << attacked_points << "\n";
    os << "sup ||x|| over trailing half horizon: " << sup_tail_norm << "\n";
    os << "||d||_inf: " << disturbance_sup << "\n";
    os << "ultimate bound (multiple of ||d||_inf): " << ultimate_bound << "\n";
    if (!lyapunov.empty()) {
        os << "V(0): " << lyapunov.front() << "\n";
        os << "V(end): " << lyapunov.back() << "\n";
    }
    return os.str();
}

}  // namespace mtd::analysis
