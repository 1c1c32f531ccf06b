#pragma once

#include "mtd/analysis.hpp"
#include "mtd/sim.hpp"

#include <string>
#include <vector>

namespace mtd::report {

/// Header row then one row per sample: t, x_1..x_{N nx}, sigma, attack_active.
/// Values are printed with round-trip precision so identical runs produce
/// byte-identical files.
std::string results_csv(const sim::SimulationResult& result);

std::string events_csv(const sim::SimulationResult& result);

std::string lyapunov_csv(const std::vector<double>& times, const std::vector<double>& values);

std::string violations_csv(const std::vector<analysis::DecayViolation>& violations);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool staircase = false;
};

/// Self-contained SVG line plot; series are downsampled deterministically
/// when long. Axis labels should carry units.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series,
                          int width = 960, int height = 540);

void write_file(const std::string& path, const std::string& content);

}  // namespace mtd::report
