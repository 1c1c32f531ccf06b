// mtdctl: synthesize security-constrained control sublayers, design robust
// distributed gains, simulate switched closed loops under DoS attacks, and
// emit CSV/SVG reports.

#include "mtd/bundled.hpp"
#include "mtd/errors.hpp"
#include "mtd/pipeline.hpp"
#include "mtd/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUnsatisfiable = 2;
constexpr int kExitValidationFailed = 3;
constexpr int kExitSchema = 4;
constexpr int kExitDivergence = 5;

int exit_code_for(const mtd::Error& e) {
    switch (e.code()) {
        case mtd::ErrorCode::Unsatisfiable: return kExitUnsatisfiable;
        case mtd::ErrorCode::SchemaViolation:
        case mtd::ErrorCode::MissingInput:
        case mtd::ErrorCode::DimensionMismatch:
        case mtd::ErrorCode::EventOffGrid: return kExitSchema;
        default: return 1;
    }
}

struct CommonArgs {
    std::vector<std::string> scenarios;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    double tolerance = 1e-6;
    int jobs = 1;
    bool expect_stable = false;
};

mtd::scenario::Scenario load(const std::string& path) {
    return mtd::scenario::load_file(path);
}

/// Stage selector so one driver covers synth/design/simulate/analyze/report.
enum class Stage { Synth, Design, Simulate, Analyze, Report };

int run_stage(const mtd::scenario::Scenario& s, const CommonArgs& args, Stage stage,
              const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto synth_result = mtd::pipeline::run_synth(s, args.seed);
    mtd::report::write_file((fs::path(out_dir) / "structures.json").string(),
                            mtd::pipeline::structures_json(synth_result));
    if (stage == Stage::Synth) return kExitOk;

    const auto gains = mtd::pipeline::run_design(s, synth_result.layer);
    mtd::report::write_file((fs::path(out_dir) / "gains.json").string(),
                            mtd::pipeline::gains_json(gains));
    for (std::size_t k = 0; k < gains.validation.size(); ++k) {
        if (!gains.validation[k].pass) {
            std::cerr << "validation condition failed for sublayer " << (k + 1)
                      << " (min eigenvalue " << gains.validation[k].min_eigenvalue << ")\n";
            return kExitValidationFailed;
        }
    }
    if (stage == Stage::Design) return kExitOk;

    const auto result = mtd::pipeline::run_simulate(s, synth_result.layer, gains);
    mtd::report::write_file((fs::path(out_dir) / "results.csv").string(),
                            mtd::report::results_csv(result));
    mtd::report::write_file((fs::path(out_dir) / "events.csv").string(),
                            mtd::report::events_csv(result));
    if (stage == Stage::Simulate) {
        return (result.diverged && args.expect_stable) ? kExitDivergence : kExitOk;
    }

    const auto report = mtd::pipeline::run_analyze(result, gains, args.tolerance);
    mtd::report::write_file((fs::path(out_dir) / "lyapunov.csv").string(),
                            mtd::report::lyapunov_csv(result.times, report.lyapunov));
    mtd::report::write_file((fs::path(out_dir) / "violations.csv").string(),
                            mtd::report::violations_csv(report.decay_violations));
    mtd::report::write_file((fs::path(out_dir) / "report.txt").string(),
                            "scenario: " + s.name + "\n" + report.summary());
    if (stage == Stage::Analyze) {
        return (result.diverged && args.expect_stable) ? kExitDivergence : kExitOk;
    }

    mtd::pipeline::write_plots(out_dir, result, report);
    return (result.diverged && args.expect_stable) ? kExitDivergence : kExitOk;
}

int run_scenarios(const CommonArgs& args, Stage stage) {
    if (args.scenarios.empty()) {
        std::cerr << "no --scenario given\n";
        return kExitSchema;
    }
    std::vector<int> codes(args.scenarios.size(), 0);
    const int jobs = std::max(1, args.jobs);

    auto work = [&](std::size_t idx) {
        const std::string& path = args.scenarios[idx];
        try {
            const auto s = load(path);
            const std::string out_dir =
                args.scenarios.size() == 1
                    ? args.out
                    : (fs::path(args.out) / fs::path(path).stem().string()).string();
            codes[idx] = run_stage(s, args, stage, out_dir);
        } catch (const mtd::Error& e) {
            std::cerr << path << ": " << mtd::error_code_name(e.code()) << ": " << e.what() << "\n";
            codes[idx] = exit_code_for(e);
        } catch (const std::exception& e) {
            std::cerr << path << ": " << e.what() << "\n";
            codes[idx] = 1;
        }
    };

    if (jobs == 1 || args.scenarios.size() == 1) {
        for (std::size_t i = 0; i < args.scenarios.size(); ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        for (; next < args.scenarios.size();) {
            pool.clear();
            for (int t = 0; t < jobs && next < args.scenarios.size(); ++t, ++next) {
                pool.emplace_back(work, next);
            }
            for (auto& th : pool) th.join();
        }
    }
    for (int c : codes) {
        if (c != 0) return c;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moving-target-defense control layer toolkit"};
    app.require_subcommand(1);

    CommonArgs args;

    auto add_common = [&args](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario) {
            cmd->add_option("--scenario", args.scenarios, "scenario JSON file (repeatable)")
                ->required();
        }
        cmd->add_option("--out", args.out, "output directory");
        cmd->add_option("--seed", args.seed, "synthesis seed override");
        cmd->add_option("--jobs", args.jobs, "parallelism across scenarios");
        cmd->add_option("--tolerance", args.tolerance, "decay-check tolerance factor");
        cmd->add_flag("--expect-stable", args.expect_stable,
                      "exit 5 when the simulation hits the divergence ceiling");
    };

    auto* synth = app.add_subcommand("synth", "generate the control sublayer structures");
    add_common(synth, true);
    auto* design = app.add_subcommand("design", "synthesize structures and design the gains");
    add_common(design, true);
    auto* simulate = app.add_subcommand("simulate", "run the closed-loop simulation");
    add_common(simulate, true);
    auto* analyze = app.add_subcommand("analyze", "simulate and produce the ISS report");
    add_common(analyze, true);
    auto* report = app.add_subcommand("report", "full pipeline including SVG plots");
    add_common(report, true);

    auto* repro = app.add_subcommand("repro-paper", "run the bundled reproduction end to end");
    add_common(repro, false);

    auto* dump = app.add_subcommand("dump-scenario", "write a bundled scenario as JSON");
    std::string which = "fig4";
    std::string dump_path = "scenario.json";
    dump->add_option("--which", which, "fig3 | fig4 | decay | fast");
    dump->add_option("--file", dump_path, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_scenarios(args, Stage::Synth);
        if (design->parsed()) return run_scenarios(args, Stage::Design);
        if (simulate->parsed()) return run_scenarios(args, Stage::Simulate);
        if (analyze->parsed()) return run_scenarios(args, Stage::Analyze);
        if (report->parsed()) return run_scenarios(args, Stage::Report);
        if (repro->parsed()) {
            const auto artifacts = mtd::pipeline::repro_paper(args.out, args.seed);
            for (const auto& art : artifacts) {
                std::cout << art.name << ": "
                          << mtd::analysis::verdict_name(art.report.verdict) << "\n";
            }
            return kExitOk;
        }
        if (dump->parsed()) {
            mtd::report::write_file(dump_path,
                                    mtd::scenario::serialize(mtd::bundled::by_name(which)));
            return kExitOk;
        }
    } catch (const mtd::Error& e) {
        std::cerr << mtd::error_code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
