#pragma once

#include "mtd/linalg.hpp"

#include <vector>

namespace mtd::graph {

/// Physical interconnection graph of the agent layer. Entries are signed and
/// selfloops (diagonal entries) are allowed; only the induced 2-norm leaves
/// this structure toward the control-layer designer.
struct AgentLayerGraph {
    int n_agents = 0;
    Matrix adjacency;  // n x n, signed, selfloops on the diagonal

    /// Indices j with adjacency(i, j) != 0, including i itself for a selfloop.
    std::vector<int> neighbor_set(int i) const;
};

AgentLayerGraph make_agent_layer(const Matrix& adjacency);

/// The only quantities shared with the control-layer designer.
struct DesignerBounds {
    double norm_Aa = 0.0;  // ||A_a|| (induced 2-norm)
    double gamma_cy = 0.0; // max_i ||C_yi||^2 bound
    double gamma_f = 0.0;  // max_i nonlinearity sector bound
};

/// 0/1 structure of one control sublayer: symmetric off-diagonal edge set
/// plus selfloop flags.
struct SublayerStructure {
    int n_nodes = 0;
    std::vector<std::vector<int>> edges;  // 0/1, symmetric, zero diagonal
    std::vector<int> selfloops;           // 0/1 per node

    bool has_edge(int i, int j) const { return i != j && edges[i][j] != 0; }
    int edge_count() const;
};

SublayerStructure make_structure(int n_nodes);

/// Weighted control sublayer with its modified Laplacian and spectrum.
struct SublayerTopology {
    SublayerStructure structure;
    Matrix edge_weights;      // symmetric, zero where no structural edge
    Vector selfloop_weights;  // positive exactly on structural selfloops
    Matrix laplacian;
    Vector spectrum;  // ascending
};

struct ComponentReport {
    std::vector<std::vector<int>> components;     // node index lists
    std::vector<int> components_without_selfloop; // indices into components
    bool valid = false;
};

/// Ordered set of sublayers driven by the switching signal.
struct ControlLayer {
    std::vector<SublayerTopology> sublayers;
    double mu_min = 0.0;
};

/// h_ii = sum_j a_ij + s_i, h_ij = -a_ij. Row i of the result sums to s_i.
SublayerTopology build_modified_laplacian(const SublayerStructure& structure,
                                          const Matrix& edge_weights,
                                          const Vector& selfloop_weights);

/// Ascending eigenvalues of a symmetric matrix (Jacobi).
Vector laplacian_spectrum(const Matrix& H);

/// Connected components over the undirected edge set; selfloops mark
/// components but do not connect nodes. Valid iff every component contains
/// at least one selfloop.
ComponentReport validate_sublayer(const SublayerStructure& structure);

/// min over sublayers of the smallest Laplacian eigenvalue; throws
/// NonPositiveMuMin when a sublayer's spectrum reaches zero.
double mu_min(const std::vector<SublayerTopology>& sublayers);

ControlLayer make_control_layer(std::vector<SublayerTopology> sublayers);

/// Largest singular value (power iteration on A^T A).
double operator_norm(const Matrix& A);

}  // namespace mtd::graph
