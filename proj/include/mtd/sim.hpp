#pragma once

#include "mtd/design.hpp"
#include "mtd/graph.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mtd::sim {

/// Piecewise-constant switching signal: mode modes[k] is active on
/// [times[k], times[k+1]); the last mode holds to the end of the horizon.
/// Modes are 0-based sublayer indices.
struct SwitchingSchedule {
    std::vector<double> times;  // ascending, starting at 0
    std::vector<int> modes;
    double dwell = 0.0;  // derived min interval length

    int mode_at(double t) const;
};

SwitchingSchedule make_schedule(std::vector<double> times, std::vector<int> modes);

/// mode cycle 0,1,...,n_modes-1 repeated with the given dwell up to horizon.
SwitchingSchedule round_robin_schedule(int n_modes, double dwell, double horizon);

/// DoS model: a blocked undirected link carries no signal (weight zeroed in
/// both directions); a blocked selfloop zeroes that selfloop weight.
struct TimedBlock {
    double from = 0.0;
    double to = 0.0;  // half-open [from, to)
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> selfloops;
};

struct AttackScenario {
    std::vector<std::pair<int, int>> permanent_pairs;
    std::vector<int> permanent_selfloops;
    std::vector<TimedBlock> timed;

    bool empty() const {
        return permanent_pairs.empty() && permanent_selfloops.empty() && timed.empty();
    }
};

/// Laplacian of the topology with the links blocked at time t removed and
/// the diagonal recomputed. May violate the selfloop-per-component rule;
/// that is the attacked regime and is permitted.
Matrix effective_laplacian(const graph::SublayerTopology& topology, const AttackScenario& attack,
                           double t);

struct Event {
    double t = 0.0;
    std::string kind;    // "switch", "attack", "divergence"
    std::string detail;
};

struct SimulationResult {
    std::vector<double> times;
    Matrix states;        // one row per sample, N*n_x columns
    Matrix inputs;        // N*n_u columns
    Matrix outputs;       // N*n_y columns
    Matrix disturbances;  // N*n_d columns (as applied)
    std::vector<int> sigma;                  // active 0-based mode per sample
    std::vector<std::uint8_t> attack_active; // active sublayer degraded at t
    std::vector<Event> events;
    bool diverged = false;
    double divergence_time = 0.0;

    int samples() const { return static_cast<int>(times.size()); }
};

struct SimParams {
    double step = 1e-3;
    double horizon = 10.0;
    Vector x0;
    double divergence_ceiling = 1e6;
    bool zero_disturbance = false;
};

/// Scalar elementwise nonlinearity f(z, t) and disturbance d(t) factories.
/// Every catalog entry satisfies |f(z,t)| <= |gain| * |z|.
using NonlinearityFn = std::function<double(double, double)>;
using DisturbanceFn = std::function<double(double)>;

NonlinearityFn nonlinearity_catalog(const design::NonlinearityRef& ref);
DisturbanceFn disturbance_catalog(const design::DisturbanceRef& ref);

/// Sector slope bound of a catalog nonlinearity: |f(z,t)| <= slope * |z|.
double sector_slope(const design::NonlinearityRef& ref);

/// Right-hand side of the two-layer closed loop at time t under mode sigma:
///   xdot = A x + B_u (H_eff (x) I_nu) K x + B_f f(y, t) + B_d d(t),
///   y = C_y (A_a (x) I_nx) x.
Vector agent_dynamics(const Vector& x, double t, int sigma, const design::GainDesign& gains,
                      const graph::ControlLayer& layer, const std::vector<design::AgentModel>& agents,
                      const graph::AgentLayerGraph& agent_layer, const AttackScenario& attack,
                      bool zero_disturbance = false);

/// Fixed-step RK4 over the horizon; switch and attack times must be grid
/// aligned (throws EventOffGrid otherwise). The regime (mode + blocked set)
/// active at a step's start is frozen for all four stages.
SimulationResult simulate(const std::vector<design::AgentModel>& agents,
                          const graph::AgentLayerGraph& agent_layer,
                          const graph::ControlLayer& layer, const design::GainDesign& gains,
                          const SwitchingSchedule& schedule, const AttackScenario& attack,
                          const SimParams& params);

}  // namespace mtd::sim
