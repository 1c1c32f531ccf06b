#pragma once

#include "mtd/design.hpp"
#include "mtd/graph.hpp"
#include "mtd/sim.hpp"
#include "mtd/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtd::scenario {

struct ScheduleSpec {
    std::string type = "round_robin";  // "fixed" | "round_robin" | "explicit"
    int fixed_mode = 0;                // 0-based
    double dwell = 0.01;
    std::vector<double> times;
    std::vector<int> modes;  // 0-based
};

/// Weight assignment applied to synthesized structures: selfloops share one
/// weight; an edge {i,j} takes the even- or odd-sum weight by the parity of
/// the 1-based label sum i+j.
struct WeightRule {
    double selfloop_weight = 4.0;
    double edge_weight_even_sum = 4.0;
    double edge_weight_odd_sum = 2.0;
};

struct ExplicitSublayer {
    std::vector<std::tuple<int, int, double>> edges;  // 0-based endpoints, weight
    std::vector<std::pair<int, double>> selfloops;    // 0-based node, weight
};

/// Everything one pipeline run needs. Node and sublayer indices inside this
/// struct are 0-based; the JSON encoding is 1-based.
struct Scenario {
    std::string name;
    std::vector<design::AgentModel> agents;
    Matrix agent_adjacency;  // empty when bounds are asserted instead
    std::optional<graph::DesignerBounds> asserted_bounds;
    synth::SynthesisProblem synthesis;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::vector<ExplicitSublayer>> explicit_sublayers;
    WeightRule weight_rule;
    std::vector<design::DesignWeights> weights;  // one per agent
    ScheduleSpec schedule;
    sim::AttackScenario attack;
    sim::SimParams sim;

    int n_agents() const { return static_cast<int>(agents.size()); }
};

Scenario parse(const std::string& json_text);
Scenario load_file(const std::string& path);
std::string serialize(const Scenario& s);

/// norm(A_a), gamma_cy = max ||C_yi||^2, gamma_f = max slope_i^2 when the
/// adjacency is given; the asserted bounds otherwise.
graph::DesignerBounds designer_bounds(const Scenario& s);

sim::SwitchingSchedule build_schedule(const Scenario& s, int n_modes);

/// Applies the weight rule to a synthesized structure.
graph::SublayerTopology apply_weight_rule(const graph::SublayerStructure& structure,
                                          const WeightRule& rule);

graph::SublayerTopology build_explicit_sublayer(const ExplicitSublayer& spec, int n_nodes);

}  // namespace mtd::scenario
