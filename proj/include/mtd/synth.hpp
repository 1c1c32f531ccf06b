#pragma once

#include "mtd/graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtd::synth {

/// Inputs of the sublayer-structure synthesis: M sublayers over N nodes,
/// exactly T selfloops per sublayer, per-node selfloop capability and a
/// symmetric link risk mask (0 = excluded high-risk link).
struct SynthesisProblem {
    int n_sublayers = 1;                       // M
    int n_nodes = 1;                           // N
    int selfloop_budget = 1;                   // T
    std::vector<int> selfloop_capability;      // theta, 0/1 per node
    std::vector<std::vector<int>> risk_mask;   // r, symmetric 0/1, 1 = allowed
};

SynthesisProblem make_problem(int n_sublayers, int n_nodes, int selfloop_budget);

/// eta(i,j) = 1 while the undirected link {i,j} has not been used by any
/// previously generated sublayer.
struct NonOverlapMemory {
    std::vector<std::vector<int>> eta;
};

NonOverlapMemory fresh_memory(int n_nodes);

/// One decision per node: target[i] == i encodes a selfloop, otherwise the
/// single out-edge target. This is the pre-symmetrization assignment.
struct DirectedAssignment {
    std::vector<int> target;
};

struct SynthesizedSublayer {
    graph::SublayerStructure structure;  // symmetrized outcome
    DirectedAssignment directed;
};

struct SolverOptions {
    /// Without a seed, candidate targets are explored in ascending node
    /// index; with one, the target order is shuffled deterministically.
    std::optional<std::uint64_t> seed;
};

/// Searches for one structure satisfying the full constraint set against the
/// given memory. Throws Unsatisfiable with the dominant pruning family when
/// no assignment exists.
SynthesizedSublayer generate_one_graph(const SynthesisProblem& problem,
                                       const NonOverlapMemory& memory,
                                       int sigma,
                                       const SolverOptions& options = {});

/// Sequentially generates M sublayers, updating the non-overlap memory with
/// each symmetrized edge set. Fails (no relaxation, no retry) if some
/// sublayer is unsatisfiable.
std::vector<SynthesizedSublayer> generate_all_graphs(const SynthesisProblem& problem,
                                                     const SolverOptions& options = {});

struct ConstraintCheck {
    std::string name;
    bool pass = true;
    std::vector<std::pair<int, int>> violations;  // (i, j); selfloop rows use j == i
};

struct ConstraintReport {
    std::vector<ConstraintCheck> checks;
    bool pass = true;

    const ConstraintCheck* find(const std::string& name) const;
};

/// Independent verifier for a synthesized sublayer. The directed assignment
/// enables the row-sum and path-rule checks; with the structure alone only
/// the symmetric constraints and component validity are evaluated.
ConstraintReport check_constraints(const graph::SublayerStructure& structure,
                                   const SynthesisProblem& problem,
                                   const NonOverlapMemory& memory,
                                   const DirectedAssignment* directed = nullptr);

/// Every satisfying directed assignment, in deterministic search order.
/// Intended for small N (test oracles, diagnostics).
std::vector<DirectedAssignment> enumerate_satisfying(const SynthesisProblem& problem,
                                                     const NonOverlapMemory& memory);

}  // namespace mtd::synth
