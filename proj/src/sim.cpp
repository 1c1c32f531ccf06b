#include "mtd/sim.hpp"

#include "mtd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mtd::sim {

int SwitchingSchedule::mode_at(double t) const {
    int lo = 0, hi = static_cast<int>(times.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (times[static_cast<std::size_t>(mid)] <= t) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return modes[static_cast<std::size_t>(lo)];
}

SwitchingSchedule make_schedule(std::vector<double> times, std::vector<int> modes) {
    if (times.empty() || times.size() != modes.size() || times.front() != 0.0) {
        throw Error(ErrorCode::SchemaViolation, "schedule: needs times starting at 0, one mode each");
    }
    SwitchingSchedule s;
    s.dwell = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double gap = times[k + 1] - times[k];
        if (gap <= 0.0) {
            throw Error(ErrorCode::SchemaViolation, "schedule: times must be strictly increasing");
        }
        s.dwell = std::min(s.dwell, gap);
    }
    if (times.size() == 1) s.dwell = 0.0;
    s.times = std::move(times);
    s.modes = std::move(modes);
    return s;
}

SwitchingSchedule round_robin_schedule(int n_modes, double dwell, double horizon) {
    if (n_modes < 1 || dwell <= 0.0) {
        throw Error(ErrorCode::SchemaViolation, "round robin schedule: needs n_modes >= 1, dwell > 0");
    }
    std::vector<double> times;
    std::vector<int> modes;
    for (int k = 0; static_cast<double>(k) * dwell < horizon; ++k) {
        times.push_back(static_cast<double>(k) * dwell);
        modes.push_back(k % n_modes);
    }
    return make_schedule(std::move(times), std::move(modes));
}

namespace {

bool pair_blocked(const AttackScenario& attack, double t, int i, int j) {
    for (const auto& [a, b] : attack.permanent_pairs) {
        if ((a == i && b == j) || (a == j && b == i)) return true;
    }
    for (const auto& block : attack.timed) {
        if (t < block.from || t >= block.to) continue;
        for (const auto& [a, b] : block.pairs) {
            if ((a == i && b == j) || (a == j && b == i)) return true;
        }
    }
    return false;
}

bool selfloop_blocked(const AttackScenario& attack, double t, int i) {
    if (std::find(attack.permanent_selfloops.begin(), attack.permanent_selfloops.end(), i) !=
        attack.permanent_selfloops.end()) {
        return true;
    }
    for (const auto& block : attack.timed) {
        if (t < block.from || t >= block.to) continue;
        if (std::find(block.selfloops.begin(), block.selfloops.end(), i) != block.selfloops.end()) {
            return true;
        }
    }
    return false;
}

}  // namespace

Matrix effective_laplacian(const graph::SublayerTopology& topology, const AttackScenario& attack,
                           double t) {
    const int n = topology.structure.n_nodes;
    Matrix H = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = selfloop_blocked(attack, t, i) ? 0.0 : topology.selfloop_weights(i);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double w = topology.edge_weights(i, j);
            if (w != 0.0 && pair_blocked(attack, t, i, j)) w = 0.0;
            diag += w;
            H(i, j) = -w;
        }
        H(i, i) = diag;
    }
    return H;
}

NonlinearityFn nonlinearity_catalog(const design::NonlinearityRef& ref) {
    const double c = ref.gain;
    if (ref.id == "zero") return [](double, double) { return 0.0; };
    if (ref.id == "scaled_tanh") return [c](double z, double) { return c * std::tanh(z); };
    if (ref.id == "scaled_sin") return [c](double z, double) { return c * std::sin(z); };
    if (ref.id == "sin_tanh") return [c](double z, double t) { return c * std::sin(t) * std::tanh(z); };
    if (ref.id == "sin_sin") return [c](double z, double t) { return c * std::sin(t) * std::sin(z); };
    if (ref.id == "linear") return [c](double z, double) { return c * z; };
    throw Error(ErrorCode::UnknownCatalogId, "unknown nonlinearity id '" + ref.id + "'");
}

DisturbanceFn disturbance_catalog(const design::DisturbanceRef& ref) {
    if (ref.id == "zero") return [](double) { return 0.0; };
    if (ref.id == "sine") {
        const double a = ref.amplitude, w = ref.angular_frequency;
        return [a, w](double t) { return a * std::sin(w * t); };
    }
    throw Error(ErrorCode::UnknownCatalogId, "unknown disturbance id '" + ref.id + "'");
}

double sector_slope(const design::NonlinearityRef& ref) {
    nonlinearity_catalog(ref);  // validates the id
    return ref.id == "zero" ? 0.0 : std::abs(ref.gain);
}

namespace {

/// Precomputed stacked closed-loop pieces shared by all steps.
struct ClosedLoop {
    Matrix A, B_u, B_f, B_d, K;
    Matrix interconnect;  // C_y (A_a (x) I_nx)
    std::vector<NonlinearityFn> f;
    std::vector<DisturbanceFn> d;
    int n_x = 0, n_u = 0, n_y = 0, n_g = 0, n_d = 0, n_agents = 0;

    ClosedLoop(const std::vector<design::AgentModel>& agents, const graph::AgentLayerGraph& agent_layer,
               const design::GainDesign& gains) {
        const design::Aggregate agg = design::build_aggregate(agents, gains);
        A = agg.A;
        B_u = agg.B_u;
        B_f = agg.B_f;
        B_d = agg.B_d;
        K = agg.K;
        n_agents = static_cast<int>(agents.size());
        n_x = agents.front().n_x();
        n_u = agents.front().n_u();
        n_y = agents.front().n_y();
        n_g = agents.front().n_g();
        n_d = agents.front().n_d();
        if (agent_layer.n_agents != n_agents) {
            throw Error(ErrorCode::DimensionMismatch, "agent layer size disagrees with agent list");
        }
        interconnect =
            agg.C_y * linalg::kron(agent_layer.adjacency, Matrix::Identity(n_x, n_x));
        for (const auto& a : agents) {
            if (a.n_g() != a.n_y()) {
                throw Error(ErrorCode::DimensionMismatch,
                            "catalog nonlinearities are elementwise and need n_g == n_y");
            }
            f.push_back(nonlinearity_catalog(a.f));
            d.push_back(disturbance_catalog(a.d));
        }
    }

    Vector output(const Vector& x) const { return interconnect * x; }

    Vector nonlinearity(const Vector& y, double t) const {
        Vector out(n_agents * n_g);
        for (int i = 0; i < n_agents; ++i) {
            for (int k = 0; k < n_g; ++k) out(i * n_g + k) = f[static_cast<std::size_t>(i)](y(i * n_y + k), t);
        }
        return out;
    }

    Vector disturbance(double t, bool zero) const {
        Vector out = Vector::Zero(n_agents * n_d);
        if (zero) return out;
        for (int i = 0; i < n_agents; ++i) {
            const double v = d[static_cast<std::size_t>(i)](t);
            for (int k = 0; k < n_d; ++k) out(i * n_d + k) = v;
        }
        return out;
    }

    /// HK = B_u (H_eff (x) I_nu) K precomputed per regime.
    Vector rhs(double t, const Vector& x, const Matrix& HK, bool zero_disturbance) const {
        const Vector y = output(x);
        return A * x + HK * x + B_f * nonlinearity(y, t) + B_d * disturbance(t, zero_disturbance);
    }
};

bool grid_aligned(double t, double h) {
    const double k = std::round(t / h);
    return std::abs(t - k * h) <= 1e-9 * std::max(1.0, std::abs(t));
}

}  // namespace

Vector agent_dynamics(const Vector& x, double t, int sigma, const design::GainDesign& gains,
                      const graph::ControlLayer& layer, const std::vector<design::AgentModel>& agents,
                      const graph::AgentLayerGraph& agent_layer, const AttackScenario& attack,
                      bool zero_disturbance) {
    const ClosedLoop loop(agents, agent_layer, gains);
    if (x.size() != loop.n_agents * loop.n_x) {
        throw Error(ErrorCode::DimensionMismatch, "agent_dynamics: state size mismatch");
    }
    const Matrix H_eff = effective_laplacian(layer.sublayers[static_cast<std::size_t>(sigma)], attack, t);
    const Matrix HK = loop.B_u * linalg::kron(H_eff, Matrix::Identity(loop.n_u, loop.n_u)) * loop.K;
    return loop.rhs(t, x, HK, zero_disturbance);
}

SimulationResult simulate(const std::vector<design::AgentModel>& agents,
                          const graph::AgentLayerGraph& agent_layer, const graph::ControlLayer& layer,
                          const design::GainDesign& gains, const SwitchingSchedule& schedule,
                          const AttackScenario& attack, const SimParams& params) {
    const double h = params.step;
    if (h <= 0.0 || params.horizon <= 0.0) {
        throw Error(ErrorCode::SchemaViolation, "simulate: step and horizon must be positive");
    }
    for (double t : schedule.times) {
        if (t > 0.0 && !grid_aligned(t, h)) {
            throw Error(ErrorCode::EventOffGrid,
                        "switch time " + std::to_string(t) + " is not a multiple of the step");
        }
    }
    for (const auto& block : attack.timed) {
        if (block.to <= block.from) {
            throw Error(ErrorCode::SchemaViolation, "attack block interval is empty or reversed");
        }
        if (!grid_aligned(block.from, h) || !grid_aligned(block.to, h)) {
            throw Error(ErrorCode::EventOffGrid, "attack interval boundary is not a multiple of the step");
        }
    }
    const int n_modes = static_cast<int>(layer.sublayers.size());
    for (int m : schedule.modes) {
        if (m < 0 || m >= n_modes) {
            throw Error(ErrorCode::SchemaViolation, "schedule references sublayer out of range");
        }
    }

    const ClosedLoop loop(agents, agent_layer, gains);
    const int dim = loop.n_agents * loop.n_x;
    if (params.x0.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "simulate: x0 has wrong dimension");
    }

    const long steps = std::lround(params.horizon / h);
    if (!grid_aligned(params.horizon, h)) {
        throw Error(ErrorCode::EventOffGrid, "horizon is not a multiple of the step");
    }

    SimulationResult r;
    r.times.reserve(static_cast<std::size_t>(steps) + 1);
    r.states.resize(steps + 1, dim);
    r.inputs.resize(steps + 1, loop.n_agents * loop.n_u);
    r.outputs.resize(steps + 1, loop.n_agents * loop.n_y);
    r.disturbances.resize(steps + 1, loop.n_agents * loop.n_d);
    r.sigma.reserve(static_cast<std::size_t>(steps) + 1);
    r.attack_active.reserve(static_cast<std::size_t>(steps) + 1);

    const Matrix I_nu = Matrix::Identity(loop.n_u, loop.n_u);
    Vector x = params.x0;
    int prev_mode = -1;
    bool prev_attacked = false;

    long k = 0;
    for (; k <= steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const int mode = schedule.mode_at(t);
        const auto& topo = layer.sublayers[static_cast<std::size_t>(mode)];
        const Matrix H_eff = effective_laplacian(topo, attack, t);
        const bool attacked = (H_eff - topo.laplacian).cwiseAbs().maxCoeff() > 0.0;
        const Matrix HKu = linalg::kron(H_eff, I_nu) * loop.K;

        if (mode != prev_mode && k > 0) {
            r.events.push_back({t, "switch", "sublayer " + std::to_string(mode + 1) + " active"});
        }
        if (attacked != prev_attacked) {
            r.events.push_back({t, "attack",
                                attacked ? "active sublayer degraded" : "active sublayer intact"});
        }
        prev_mode = mode;
        prev_attacked = attacked;

        const Vector y = loop.output(x);
        const Vector d = loop.disturbance(t, params.zero_disturbance);
        r.times.push_back(t);
        r.states.row(k) = x.transpose();
        r.inputs.row(k) = (HKu * x).transpose();
        r.outputs.row(k) = y.transpose();
        r.disturbances.row(k) = d.transpose();
        r.sigma.push_back(mode);
        r.attack_active.push_back(attacked ? 1 : 0);

        if (x.norm() > params.divergence_ceiling) {
            r.diverged = true;
            r.divergence_time = t;
            r.events.push_back({t, "divergence", "state norm exceeded ceiling"});
            ++k;
            break;
        }
        if (k == steps) {
            ++k;
            break;
        }

        const Matrix HK = loop.B_u * HKu;
        const bool zd = params.zero_disturbance;
        const Vector k1 = loop.rhs(t, x, HK, zd);
        const Vector k2 = loop.rhs(t + h / 2.0, x + (h / 2.0) * k1, HK, zd);
        const Vector k3 = loop.rhs(t + h / 2.0, x + (h / 2.0) * k2, HK, zd);
        const Vector k4 = loop.rhs(t + h, x + h * k3, HK, zd);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // Trim storage when the run stopped early.
    const long kept = k;
    r.states.conservativeResize(kept, Eigen::NoChange);
    r.inputs.conservativeResize(kept, Eigen::NoChange);
    r.outputs.conservativeResize(kept, Eigen::NoChange);
    r.disturbances.conservativeResize(kept, Eigen::NoChange);
    return r;
}

}  // namespace mtd::sim
