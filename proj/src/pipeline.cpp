#include "mtd/pipeline.hpp"

#include "mtd/bundled.hpp"
#include "mtd/errors.hpp"
#include "mtd/report.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace mtd::pipeline {

using nlohmann::json;

SynthResult run_synth(const scenario::Scenario& s, std::optional<std::uint64_t> seed_override) {
    SynthResult out;
    std::vector<graph::SublayerTopology> topologies;
    if (s.explicit_sublayers) {
        for (const auto& sub : *s.explicit_sublayers) {
            topologies.push_back(scenario::build_explicit_sublayer(sub, s.n_agents()));
        }
    } else {
        synth::SolverOptions options;
        options.seed = seed_override ? seed_override : s.synth_seed;
        out.structures = synth::generate_all_graphs(s.synthesis, options);
        for (const auto& st : out.structures) {
            topologies.push_back(scenario::apply_weight_rule(st.structure, s.weight_rule));
        }
    }
    out.layer = graph::make_control_layer(std::move(topologies));
    return out;
}

design::GainDesign run_design(const scenario::Scenario& s, const graph::ControlLayer& layer) {
    const graph::DesignerBounds bounds = scenario::designer_bounds(s);
    return design::run_design_procedure(s.agents, bounds, s.weights, layer);
}

sim::SimulationResult run_simulate(const scenario::Scenario& s, const graph::ControlLayer& layer,
                                   const design::GainDesign& gains) {
    const graph::AgentLayerGraph agent_layer = graph::make_agent_layer(
        s.agent_adjacency.size() > 0 ? s.agent_adjacency : Matrix::Zero(s.n_agents(), s.n_agents()));
    const sim::SwitchingSchedule schedule =
        scenario::build_schedule(s, static_cast<int>(layer.sublayers.size()));
    return sim::simulate(s.agents, agent_layer, layer, gains, schedule, s.attack, s.sim);
}

analysis::IssReport run_analyze(const sim::SimulationResult& result, const design::GainDesign& gains,
                                double decay_tol_factor) {
    analysis::AnalysisOptions options;
    options.decay_tol_factor = decay_tol_factor;
    return analysis::analyze(result, gains, options);
}

namespace {

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string structures_json(const SynthResult& synth_result) {
    json j;
    j["mu_min"] = synth_result.layer.mu_min;
    json subs = json::array();
    for (std::size_t k = 0; k < synth_result.layer.sublayers.size(); ++k) {
        const auto& topo = synth_result.layer.sublayers[k];
        const int n = topo.structure.n_nodes;
        json sub;
        json loops = json::array();
        json loop_weights = json::array();
        for (int i = 0; i < n; ++i) {
            if (topo.structure.selfloops[i]) {
                loops.push_back(i + 1);
                loop_weights.push_back({i + 1, topo.selfloop_weights(i)});
            }
        }
        json edges = json::array();
        for (int i = 0; i < n; ++i) {
            for (int jdx = i + 1; jdx < n; ++jdx) {
                if (topo.structure.edges[i][jdx]) {
                    edges.push_back({i + 1, jdx + 1, topo.edge_weights(i, jdx)});
                }
            }
        }
        sub["selfloops"] = std::move(loops);
        sub["selfloop_weights"] = std::move(loop_weights);
        sub["edges"] = std::move(edges);
        json spec = json::array();
        for (Eigen::Index i = 0; i < topo.spectrum.size(); ++i) spec.push_back(topo.spectrum(i));
        sub["spectrum"] = std::move(spec);
        if (k < synth_result.structures.size()) {
            json directed = json::array();
            for (int t : synth_result.structures[k].directed.target) directed.push_back(t + 1);
            sub["directed_assignment"] = std::move(directed);
        }
        subs.push_back(std::move(sub));
    }
    j["sublayers"] = std::move(subs);
    return j.dump(2) + "\n";
}

std::string gains_json(const design::GainDesign& gains) {
    json j;
    j["mu_min"] = gains.mu_min;
    j["a_f"] = gains.a_f;
    j["a_d"] = gains.a_d;
    j["gamma_d"] = gains.gamma_d;
    json agents = json::array();
    for (std::size_t i = 0; i < gains.P.size(); ++i) {
        json a;
        a["P"] = matrix_json(gains.P[i]);
        a["K"] = matrix_json(gains.K[i]);
        a["Q_f"] = matrix_json(gains.Q_f[i]);
        agents.push_back(std::move(a));
    }
    j["agents"] = std::move(agents);
    json vals = json::array();
    for (std::size_t s = 0; s < gains.validation.size(); ++s) {
        vals.push_back({{"sublayer", s + 1},
                        {"min_eigenvalue", gains.validation[s].min_eigenvalue},
                        {"pass", gains.validation[s].pass}});
    }
    j["validation"] = std::move(vals);
    json low;
    low["pass"] = gains.low_dim.pass;
    json q_eigs = json::array();
    for (const auto& Qv : gains.low_dim.Q_v) {
        q_eigs.push_back(linalg::symmetric_eigenvalues(Qv)(0));
    }
    low["min_eigenvalues"] = std::move(q_eigs);
    j["low_dimension"] = std::move(low);
    return j.dump(2) + "\n";
}

void write_plots(const std::string& out_dir, const sim::SimulationResult& result,
                 const analysis::IssReport& report) {
    namespace fs = std::filesystem;
    const int n = result.samples();

    report::Series norm_series{"||x(t)||", {}, {}, false};
    for (int k = 0; k < n; ++k) {
        norm_series.x.push_back(result.times[static_cast<std::size_t>(k)]);
        norm_series.y.push_back(result.states.row(k).norm());
    }
    report::write_file((fs::path(out_dir) / "trajectory_norm.svg").string(),
                       report::svg_line_plot("State norm", "t [s]", "||x||", {norm_series}));

    report::Series sigma_series{"sigma(t)", {}, {}, true};
    for (int k = 0; k < n; ++k) {
        sigma_series.x.push_back(result.times[static_cast<std::size_t>(k)]);
        sigma_series.y.push_back(result.sigma[static_cast<std::size_t>(k)] + 1);
    }
    report::write_file((fs::path(out_dir) / "switching.svg").string(),
                       report::svg_line_plot("Active sublayer", "t [s]", "sigma", {sigma_series}));

    std::vector<report::Series> lyap;
    report::Series v_series{"V(t)", {}, {}, false};
    for (int k = 0; k < n; ++k) {
        v_series.x.push_back(result.times[static_cast<std::size_t>(k)]);
        v_series.y.push_back(report.lyapunov[static_cast<std::size_t>(k)]);
    }
    lyap.push_back(std::move(v_series));
    if (report.disturbance_sup == 0.0 && !result.diverged && n > 0) {
        // Envelope on V implied by ||x|| <= kappa_e exp(-sigma_e t) ||x0||.
        const double v0 = report.lyapunov.front();
        report::Series env{"envelope", {}, {}, false};
        for (int k = 0; k < n; ++k) {
            const double t = result.times[static_cast<std::size_t>(k)];
            env.x.push_back(t);
            env.y.push_back(v0 * report.constants.kappa_e * report.constants.kappa_e *
                            std::exp(-2.0 * report.constants.sigma_e * t));
        }
        lyap.push_back(std::move(env));
    }
    report::write_file((fs::path(out_dir) / "lyapunov.svg").string(),
                       report::svg_line_plot("Common Lyapunov function", "t [s]", "V", lyap));
}

ExperimentArtifacts run_all(const scenario::Scenario& s, const std::string& out_dir,
                            std::optional<std::uint64_t> seed_override, double decay_tol_factor) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const SynthResult synth_result = run_synth(s, seed_override);
    report::write_file((fs::path(out_dir) / "structures.json").string(), structures_json(synth_result));

    const design::GainDesign gains = run_design(s, synth_result.layer);
    report::write_file((fs::path(out_dir) / "gains.json").string(), gains_json(gains));

    ExperimentArtifacts art;
    art.name = s.name;
    art.result = run_simulate(s, synth_result.layer, gains);
    report::write_file((fs::path(out_dir) / "results.csv").string(), report::results_csv(art.result));
    report::write_file((fs::path(out_dir) / "events.csv").string(), report::events_csv(art.result));

    art.report = run_analyze(art.result, gains, decay_tol_factor);
    report::write_file((fs::path(out_dir) / "lyapunov.csv").string(),
                       report::lyapunov_csv(art.result.times, art.report.lyapunov));
    report::write_file((fs::path(out_dir) / "violations.csv").string(),
                       report::violations_csv(art.report.decay_violations));
    report::write_file((fs::path(out_dir) / "report.txt").string(),
                       "scenario: " + s.name + "\n" + art.report.summary());
    write_plots(out_dir, art.result, art.report);
    return art;
}

std::vector<ExperimentArtifacts> repro_paper(const std::string& out_dir,
                                             std::optional<std::uint64_t> seed_override) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<ExperimentArtifacts> artifacts;
    for (const std::string& name : bundled::names()) {
        const scenario::Scenario s = bundled::by_name(name);
        artifacts.push_back(
            run_all(s, (fs::path(out_dir) / name).string(), seed_override, 1e-6));
    }
    return artifacts;
}

}  // namespace mtd::pipeline
