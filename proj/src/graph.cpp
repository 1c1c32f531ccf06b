#include "mtd/graph.hpp"

#include "mtd/errors.hpp"

#include <cmath>
#include <string>

namespace mtd::graph {

std::vector<int> AgentLayerGraph::neighbor_set(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n_agents; ++j) {
        if (adjacency(i, j) != 0.0) out.push_back(j);
    }
    return out;
}

AgentLayerGraph make_agent_layer(const Matrix& adjacency) {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "agent layer adjacency must be square, N >= 1");
    }
    AgentLayerGraph g;
    g.n_agents = static_cast<int>(adjacency.rows());
    g.adjacency = adjacency;
    return g;
}

int SublayerStructure::edge_count() const {
    int c = 0;
    for (int i = 0; i < n_nodes; ++i)
        for (int j = i + 1; j < n_nodes; ++j) c += edges[i][j];
    return c;
}

SublayerStructure make_structure(int n_nodes) {
    SublayerStructure s;
    s.n_nodes = n_nodes;
    s.edges.assign(n_nodes, std::vector<int>(n_nodes, 0));
    s.selfloops.assign(n_nodes, 0);
    return s;
}

SublayerTopology build_modified_laplacian(const SublayerStructure& structure,
                                          const Matrix& edge_weights,
                                          const Vector& selfloop_weights) {
    const int n = structure.n_nodes;
    if (edge_weights.rows() != n || edge_weights.cols() != n || selfloop_weights.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "build_modified_laplacian: size mismatch");
    }
    if (!linalg::is_symmetric(edge_weights)) {
        throw Error(ErrorCode::NotSymmetric, "build_modified_laplacian: edge weights not symmetric");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool structural = structure.edges[i][j] != 0;
            const double w = edge_weights(i, j);
            if (w < 0.0) {
                throw Error(ErrorCode::WeightStructureMismatch,
                            "negative edge weight at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (structural != (w > 0.0)) {
                throw Error(ErrorCode::WeightStructureMismatch,
                            "edge weight / structure mismatch at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
            }
        }
        const bool loop = structure.selfloops[i] != 0;
        const double s = selfloop_weights(i);
        if (s < 0.0 || loop != (s > 0.0)) {
            throw Error(ErrorCode::WeightStructureMismatch,
                        "selfloop weight / structure mismatch at node " + std::to_string(i));
        }
    }

    SublayerTopology topo;
    topo.structure = structure;
    topo.edge_weights = edge_weights;
    topo.selfloop_weights = selfloop_weights;
    topo.laplacian = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = selfloop_weights(i);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            diag += edge_weights(i, j);
            topo.laplacian(i, j) = -edge_weights(i, j);
        }
        topo.laplacian(i, i) = diag;
    }
    topo.spectrum = laplacian_spectrum(topo.laplacian);
    return topo;
}

Vector laplacian_spectrum(const Matrix& H) {
    if (!linalg::is_symmetric(H)) {
        throw Error(ErrorCode::NotSymmetric, "laplacian_spectrum: matrix not symmetric");
    }
    return linalg::symmetric_eigenvalues(H);
}

ComponentReport validate_sublayer(const SublayerStructure& structure) {
    const int n = structure.n_nodes;
    ComponentReport report;
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (int start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<int> stack{start};
        comp[start] = n_comp;
        std::vector<int> members;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (int j = 0; j < n; ++j) {
                if (v != j && structure.edges[v][j] != 0 && comp[j] < 0) {
                    comp[j] = n_comp;
                    stack.push_back(j);
                }
            }
        }
        report.components.push_back(std::move(members));
        ++n_comp;
    }
    for (std::size_t c = 0; c < report.components.size(); ++c) {
        bool has_loop = false;
        for (int v : report.components[c]) {
            if (structure.selfloops[v] != 0) has_loop = true;
        }
        if (!has_loop) report.components_without_selfloop.push_back(static_cast<int>(c));
    }
    report.valid = report.components_without_selfloop.empty();
    return report;
}

double mu_min(const std::vector<SublayerTopology>& sublayers) {
    if (sublayers.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "mu_min: control layer has no sublayers");
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sublayers.size(); ++s) {
        const double mu1 = sublayers[s].spectrum(0);
        if (mu1 <= 0.0) {
            throw Error(ErrorCode::NonPositiveMuMin,
                        "sublayer " + std::to_string(s + 1) + " has smallest eigenvalue " +
                            std::to_string(mu1) + " <= 0");
        }
        m = std::min(m, mu1);
    }
    return m;
}

ControlLayer make_control_layer(std::vector<SublayerTopology> sublayers) {
    ControlLayer layer;
    layer.mu_min = mu_min(sublayers);
    layer.sublayers = std::move(sublayers);
    return layer;
}

double operator_norm(const Matrix& A) { return linalg::operator_norm(A); }

}  // namespace mtd::graph
