#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtd/bundled.hpp"
#include "mtd/errors.hpp"
#include "mtd/pipeline.hpp"
#include "mtd/sim.hpp"

#include <cmath>

using namespace mtd;
using namespace mtd::sim;

namespace {

graph::SublayerTopology two_node_topology() {
    graph::SublayerStructure s = graph::make_structure(2);
    s.selfloops[0] = 1;
    s.edges[0][1] = s.edges[1][0] = 1;
    Matrix w(2, 2);
    w << 0, 1, 1, 0;
    Vector sl(2);
    sl << 1.0, 0.0;
    return graph::build_modified_laplacian(s, w, sl);
}

}  // namespace

TEST_CASE("effective laplacian: no blocks is the identity map") {
    const auto topo = two_node_topology();
    AttackScenario none;
    CHECK((effective_laplacian(topo, none, 0.0) - topo.laplacian).norm() == 0.0);
}

TEST_CASE("effective laplacian: blocked edge and blocked selfloop") {
    const auto topo = two_node_topology();
    AttackScenario block_edge;
    block_edge.permanent_pairs.push_back({0, 1});
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 1.0;  // selfloop survives, edge contribution gone
    CHECK((effective_laplacian(topo, block_edge, 0.0) - expected).norm() == 0.0);

    graph::SublayerStructure s1 = graph::make_structure(1);
    s1.selfloops[0] = 1;
    Vector sl(1);
    sl << 3.0;
    const auto single = graph::build_modified_laplacian(s1, Matrix::Zero(1, 1), sl);
    AttackScenario block_loop;
    block_loop.permanent_selfloops.push_back(0);
    CHECK(effective_laplacian(single, block_loop, 0.0)(0, 0) == 0.0);
}

TEST_CASE("timed blocks respect their half-open interval") {
    const auto topo = two_node_topology();
    AttackScenario attack;
    TimedBlock b;
    b.from = 1.0;
    b.to = 2.0;
    b.pairs.push_back({0, 1});
    attack.timed.push_back(b);
    CHECK((effective_laplacian(topo, attack, 0.5) - topo.laplacian).norm() == 0.0);
    CHECK((effective_laplacian(topo, attack, 1.0) - topo.laplacian).norm() > 0.0);
    CHECK((effective_laplacian(topo, attack, 1.999) - topo.laplacian).norm() > 0.0);
    CHECK((effective_laplacian(topo, attack, 2.0) - topo.laplacian).norm() == 0.0);
}

TEST_CASE("nonlinearity catalog values") {
    const auto f1 = nonlinearity_catalog({"scaled_tanh", 0.5});
    CHECK(f1(0.0, 0.0) == 0.0);
    const auto f3 = nonlinearity_catalog({"sin_tanh", 0.5});
    CHECK(f3(1.0, 1.5707963) == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-6));
    const auto d2 = disturbance_catalog({"sine", 1.0 / 3.0, 2.0 * 3.14159265358979323846});
    CHECK(d2(0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(nonlinearity_catalog({"nope", 1.0}), Error);
    CHECK_THROWS_AS(disturbance_catalog({"nope", 1.0, 1.0}), Error);
}

TEST_CASE("catalog sector bound holds on dense samples") {
    linalg::SplitMix64 rng(6);
    const std::vector<design::NonlinearityRef> refs = {
        {"scaled_tanh", 0.5}, {"scaled_sin", -0.4}, {"sin_tanh", 0.5},
        {"scaled_sin", -0.5}, {"sin_sin", 0.4},     {"linear", 0.5},
        {"scaled_tanh", -0.4}};
    for (const auto& ref : refs) {
        const auto f = nonlinearity_catalog(ref);
        const double slope = sector_slope(ref);
        for (int k = 0; k < 10000; ++k) {
            const double y = rng.uniform(-50.0, 50.0);
            const double t = rng.uniform(0.0, 100.0);
            const double v = f(y, t);
            CHECK(v * v <= slope * slope * y * y + 1e-15);
        }
    }
}

namespace {

struct MiniSystem {
    std::vector<design::AgentModel> agents;
    graph::AgentLayerGraph agent_layer;
    graph::ControlLayer layer;
    design::GainDesign gains;
};

/// Single nonlinear agent under its own selfloop-only sublayer.
MiniSystem single_agent_system(bool with_nonlinearity) {
    MiniSystem sys;
    design::AgentModel a;
    a.A = Matrix(2, 2);
    a.A << 0, 1, -1, 0.25;
    a.B_u = Matrix(2, 1);
    a.B_u << 0, 1;
    a.B_f = Matrix(2, 1);
    a.B_f << 0, 1;
    a.B_d = Matrix(2, 1);
    a.B_d << 0, 1;
    a.C_y = Matrix(1, 2);
    a.C_y << 0, 1;
    a.f = with_nonlinearity ? design::NonlinearityRef{"scaled_tanh", 0.5}
                            : design::NonlinearityRef{"zero", 0.0};
    a.d = {"zero", 0.0, 0.0};
    sys.agents.push_back(a);

    Matrix adj(1, 1);
    adj << 1.0;  // agent-level selfloop feeds y = x_2
    sys.agent_layer = graph::make_agent_layer(adj);

    graph::SublayerStructure st = graph::make_structure(1);
    st.selfloops[0] = 1;
    Vector w(1);
    w << 1.0;
    sys.layer = graph::make_control_layer(
        {graph::build_modified_laplacian(st, Matrix::Zero(1, 1), w)});

    std::vector<design::DesignWeights> weights(1);
    weights[0].Q = Matrix::Identity(2, 2);
    weights[0].R = Matrix::Identity(1, 1);
    graph::DesignerBounds bounds{1.0, 1.0, 0.25};
    sys.gains = design::run_design_procedure(sys.agents, bounds, weights, sys.layer);
    return sys;
}

}  // namespace

TEST_CASE("agent_dynamics: equilibrium and hand-expanded probe") {
    auto sys = single_agent_system(true);
    AttackScenario none;

    const Vector zero = Vector::Zero(2);
    CHECK(agent_dynamics(zero, 0.0, 0, sys.gains, sys.layer, sys.agents, sys.agent_layer, none)
              .norm() == 0.0);

    Vector x(2);
    x << 0.7, -0.3;
    const Vector got =
        agent_dynamics(x, 0.5, 0, sys.gains, sys.layer, sys.agents, sys.agent_layer, none);
    // By hand: y = x_2; u = 1 * K x; xdot = A x + B_u u + B_f * 0.5 tanh(y).
    const Matrix K = sys.gains.K[0];
    Vector expected = sys.agents[0].A * x + sys.agents[0].B_u * (K * x) +
                      sys.agents[0].B_f * (0.5 * std::tanh(x(1)));
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nominal single-agent reduction is Hurwitz and decays") {
    auto sys = single_agent_system(false);
    AttackScenario none;
    SimParams params;
    params.step = 1e-3;
    params.horizon = 4.0;
    params.x0 = Vector(2);
    params.x0 << 1.0, -0.5;
    const auto schedule = make_schedule({0.0}, {0});
    const auto result =
        simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains, schedule, none, params);
    CHECK_FALSE(result.diverged);
    CHECK(result.states.row(result.samples() - 1).norm() < 0.05 * params.x0.norm());
}

TEST_CASE("equilibrium is preserved exactly") {
    auto sys = single_agent_system(true);
    AttackScenario none;
    SimParams params;
    params.step = 1e-3;
    params.horizon = 1.0;
    params.x0 = Vector::Zero(2);
    params.zero_disturbance = true;
    const auto schedule = make_schedule({0.0}, {0});
    const auto result =
        simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains, schedule, none, params);
    CHECK(result.states.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RK4 observed order on a smooth nonlinear run") {
    auto sys = single_agent_system(true);
    AttackScenario none;
    const auto schedule = make_schedule({0.0}, {0});

    auto final_state = [&](double h) {
        SimParams params;
        params.step = h;
        params.horizon = 1.0;
        params.x0 = Vector(2);
        params.x0 << 0.9, 0.4;
        const auto r =
            simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains, schedule, none, params);
        return Vector(r.states.row(r.samples() - 1).transpose());
    };

    const Vector ref = final_state(1e-5);
    const double e1 = (final_state(4e-3) - ref).norm();
    const double e2 = (final_state(2e-3) - ref).norm();
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
}

TEST_CASE("off-grid events are rejected") {
    auto sys = single_agent_system(false);
    AttackScenario attack;
    TimedBlock b;
    b.from = 0.0005;  // not a multiple of h = 1e-3... wait, from=5e-4 with h=1e-3
    b.to = 0.5;
    b.selfloops.push_back(0);
    attack.timed.push_back(b);
    SimParams params;
    params.step = 1e-3;
    params.horizon = 1.0;
    params.x0 = Vector::Zero(2);
    const auto schedule = make_schedule({0.0}, {0});
    CHECK_THROWS_AS(simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains, schedule, attack, params),
                    Error);

    CHECK_THROWS_AS(
        simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains,
                 make_schedule({0.0, 0.0105}, {0, 0}), AttackScenario{},
                 [] {
                     SimParams p;
                     p.step = 1e-2;
                     p.horizon = 1.0;
                     p.x0 = Vector::Zero(2);
                     return p;
                 }()),
        Error);
}

TEST_CASE("blocked selfloop on an unstable agent diverges") {
    auto sys = single_agent_system(false);
    AttackScenario attack;
    attack.permanent_selfloops.push_back(0);
    SimParams params;
    params.step = 1e-3;
    params.horizon = 200.0;
    params.x0 = Vector(2);
    params.x0 << 1.0, 0.0;
    params.divergence_ceiling = 1e4;
    const auto schedule = make_schedule({0.0}, {0});
    const auto result =
        simulate(sys.agents, sys.agent_layer, sys.layer, sys.gains, schedule, attack, params);
    CHECK(result.diverged);
    CHECK(result.attack_active.front() == 1);
    CHECK(result.events.back().kind == "divergence");
}

TEST_CASE("simulation replays bit-identically") {
    const auto s = bundled::fast_switching();
    const auto synth_result = pipeline::run_synth(s);
    const auto gains = pipeline::run_design(s, synth_result.layer);
    auto shrink = s;
    shrink.sim.horizon = 0.5;
    const auto a = pipeline::run_simulate(shrink, synth_result.layer, gains);
    const auto b = pipeline::run_simulate(shrink, synth_result.layer, gains);
    REQUIRE(a.samples() == b.samples());
    CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.sigma == b.sigma);
}
