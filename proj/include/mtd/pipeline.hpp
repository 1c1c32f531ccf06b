#pragma once

#include "mtd/analysis.hpp"
#include "mtd/design.hpp"
#include "mtd/scenario.hpp"
#include "mtd/sim.hpp"
#include "mtd/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mtd::pipeline {

struct SynthResult {
    std::vector<synth::SynthesizedSublayer> structures;  // empty for explicit sublayers
    graph::ControlLayer layer;
};

/// Synthesizes (or loads explicit) sublayer topologies and assembles the
/// control layer. seed_override replaces the scenario's synthesis seed.
SynthResult run_synth(const scenario::Scenario& s,
                      std::optional<std::uint64_t> seed_override = {});

/// Design Procedure steps 2-3 over the scenario's agents and weights.
/// The returned design carries the per-sublayer validation verdicts; callers
/// decide whether a failed validation is fatal.
design::GainDesign run_design(const scenario::Scenario& s, const graph::ControlLayer& layer);

sim::SimulationResult run_simulate(const scenario::Scenario& s, const graph::ControlLayer& layer,
                                   const design::GainDesign& gains);

analysis::IssReport run_analyze(const sim::SimulationResult& result,
                                const design::GainDesign& gains,
                                double decay_tol_factor = 1e-6);

std::string structures_json(const SynthResult& synth_result);
std::string gains_json(const design::GainDesign& gains);

/// Writes the SVG plots for one run: trajectory norms, the switching
/// staircase, and the Lyapunov trace (with the exponential envelope when the
/// run was disturbance-free).
void write_plots(const std::string& out_dir, const sim::SimulationResult& result,
                 const analysis::IssReport& report);

struct ExperimentArtifacts {
    std::string name;
    sim::SimulationResult result;
    analysis::IssReport report;
};

/// Runs one scenario end to end, writing structures.json, gains.json,
/// results.csv, events.csv, lyapunov.csv, violations.csv, report.txt and the
/// plots into out_dir.
ExperimentArtifacts run_all(const scenario::Scenario& s, const std::string& out_dir,
                            std::optional<std::uint64_t> seed_override = {},
                            double decay_tol_factor = 1e-6);

/// Chains the bundled paper reproduction (synthesis + design once, then the
/// fig3 / fig4 / decay / fast experiments) into out_dir/<experiment>/.
std::vector<ExperimentArtifacts> repro_paper(const std::string& out_dir,
                                             std::optional<std::uint64_t> seed_override = {});

}  // namespace mtd::pipeline
