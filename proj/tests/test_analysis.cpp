#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtd/analysis.hpp"
#include "mtd/bundled.hpp"
#include "mtd/errors.hpp"
#include "mtd/pipeline.hpp"

#include <cmath>

using namespace mtd;
using namespace mtd::analysis;

TEST_CASE("lyapunov trace basics") {
    sim::SimulationResult r;
    const int n = 200;
    r.states.resize(n, 1);
    r.disturbances = Matrix::Zero(n, 1);
    r.inputs = Matrix::Zero(n, 1);
    r.outputs = Matrix::Zero(n, 1);
    for (int k = 0; k < n; ++k) {
        const double t = 0.01 * k;
        r.times.push_back(t);
        r.states(k, 0) = std::exp(-t);
        r.sigma.push_back(0);
        r.attack_active.push_back(0);
    }
    Matrix P(1, 1);
    P << 1.0;
    const auto V = lyapunov_trace(r, P);
    for (int k = 0; k < n; ++k) {
        CHECK(V[static_cast<std::size_t>(k)] ==
              doctest::Approx(std::exp(-2.0 * 0.01 * k)).epsilon(1e-12));
    }

    // All-zero states give the zero trace.
    sim::SimulationResult zero = r;
    zero.states.setZero();
    const auto Vz = lyapunov_trace(zero, P);
    for (double v : Vz) CHECK(v == 0.0);
}

TEST_CASE("exponential constants formulas") {
    const auto c1 = exponential_constants(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    CHECK(c1.kappa_e == doctest::Approx(1.0));
    CHECK(c1.sigma_e == doctest::Approx(0.5));

    Matrix P = Matrix::Zero(2, 2);
    P.diagonal() << 1.0, 4.0;
    const auto c2 = exponential_constants(P, Matrix::Identity(2, 2));
    CHECK(c2.kappa_e == doctest::Approx(2.0));
    CHECK(c2.sigma_e == doctest::Approx(1.0 / 8.0));

    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(exponential_constants(bad, Matrix::Identity(2, 2)), Error);
}

namespace {

struct Pipeline {
    scenario::Scenario s;
    pipeline::SynthResult synth;
    design::GainDesign gains;
};

Pipeline decayed() {
    Pipeline p{bundled::decay(), {}, {}};
    p.s.sim.horizon = 2.0;
    p.synth = pipeline::run_synth(p.s);
    p.gains = pipeline::run_design(p.s, p.synth.layer);
    return p;
}

}  // namespace

TEST_CASE("decay check: clean run has zero violations; corrupted gains do not") {
    auto p = decayed();
    const auto result = pipeline::run_simulate(p.s, p.synth.layer, p.gains);
    CHECK_FALSE(result.diverged);

    const auto V = lyapunov_trace(result, design::build_aggregate(p.s.agents, p.gains).P);
    const double vmax = *std::max_element(V.begin(), V.end());
    int checked = 0;
    const auto violations = decay_check(result, p.gains, 1e-6 * vmax, &checked);
    CHECK(checked > 0);
    CHECK(violations.empty());

    // Flipping the gain signs must break the decay inequality somewhere.
    auto corrupted = p.gains;
    for (auto& K : corrupted.K) K = -K;
    sim::SimulationResult bad_run;
    {
        const graph::AgentLayerGraph agent_layer = graph::make_agent_layer(p.s.agent_adjacency);
        const auto schedule = scenario::build_schedule(p.s, static_cast<int>(p.synth.layer.sublayers.size()));
        sim::SimParams params = p.s.sim;
        params.horizon = 1.0;
        params.divergence_ceiling = 1e9;
        bad_run = sim::simulate(p.s.agents, agent_layer, p.synth.layer, corrupted, schedule,
                                p.s.attack, params);
    }
    const auto bad_violations = decay_check(bad_run, corrupted, 1e-6 * vmax, nullptr);
    CHECK_FALSE(bad_violations.empty());
}

TEST_CASE("verdicts: exponential for the decay run") {
    auto p = decayed();
    const auto result = pipeline::run_simulate(p.s, p.synth.layer, p.gains);
    const auto report = analyze(result, p.gains);
    CHECK(report.verdict == Verdict::Exponential);
    CHECK(report.constants.kappa_e >= 1.0);
    CHECK(report.constants.sigma_e > 0.0);
    CHECK(report.decay_violations.empty());
}

TEST_CASE("verdict monotonicity: enlarging the attack keeps fig3 diverged") {
    auto s = bundled::fig3();
    const auto synth_result = pipeline::run_synth(s);
    const auto gains = pipeline::run_design(s, synth_result.layer);
    const auto base = pipeline::run_analyze(pipeline::run_simulate(s, synth_result.layer, gains), gains);
    REQUIRE(base.verdict == Verdict::Diverged);

    auto larger = s;
    larger.attack.permanent_selfloops.push_back(0);  // also block node 1's selfloop
    larger.attack.permanent_pairs.push_back({1, 5});
    const auto enlarged =
        pipeline::run_analyze(pipeline::run_simulate(larger, synth_result.layer, gains), gains);
    CHECK(enlarged.verdict == Verdict::Diverged);
}

TEST_CASE("lyapunov trace matches an independent recomputation on a bundled run") {
    auto p = decayed();
    p.s.sim.horizon = 1.0;
    const auto result = pipeline::run_simulate(p.s, p.synth.layer, p.gains);
    const Matrix P = design::build_aggregate(p.s.agents, p.gains).P;
    const auto V = lyapunov_trace(result, P);
    for (int k = 0; k < result.samples(); k += 37) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < result.states.cols(); ++i) {
            for (Eigen::Index j = 0; j < result.states.cols(); ++j) {
                v += result.states(k, i) * P(i, j) * result.states(k, j);
            }
        }
        CHECK(V[static_cast<std::size_t>(k)] == doctest::Approx(v).epsilon(1e-12));
    }
}
