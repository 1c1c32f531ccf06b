#include "mtd/scenario.hpp"

#include "mtd/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mtd::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, "scenario." + where + ": " + what);
}

const json& field(const json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key)) fail(where, "missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

Matrix matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) fail(where, "expected a nested array");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) fail(where, "ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], where);
    }
    return M;
}

Vector vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Vector v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k], where);
    return v;
}

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

int node_index(const json& j, const std::string& where, int n) {
    const int v = integer(j, where);
    if (v < 1 || v > n) fail(where, "node index " + std::to_string(v) + " outside 1.." + std::to_string(n));
    return v - 1;
}

std::pair<int, int> pair_index(const json& j, const std::string& where, int n) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected a [i, j] pair");
    const int a = node_index(j[0], where, n);
    const int b = node_index(j[1], where, n);
    if (a == b) fail(where, "pair endpoints must differ");
    return {a, b};
}

design::AgentModel parse_agent(const json& j, const std::string& where) {
    design::AgentModel a;
    a.A = matrix(field(j, where, "A"), where + ".A");
    a.B_u = matrix(field(j, where, "B_u"), where + ".B_u");
    a.B_f = matrix(field(j, where, "B_f"), where + ".B_f");
    a.B_d = matrix(field(j, where, "B_d"), where + ".B_d");
    a.C_y = matrix(field(j, where, "C_y"), where + ".C_y");
    const json& f = field(j, where, "f");
    a.f.id = field(f, where + ".f", "id").get<std::string>();
    if (f.contains("gain")) a.f.gain = number(f.at("gain"), where + ".f.gain");
    const json& d = field(j, where, "d");
    a.d.id = field(d, where + ".d", "id").get<std::string>();
    if (d.contains("amplitude")) a.d.amplitude = number(d.at("amplitude"), where + ".d.amplitude");
    if (d.contains("angular_frequency")) {
        a.d.angular_frequency = number(d.at("angular_frequency"), where + ".d.angular_frequency");
    }
    const int n = a.n_x();
    if (a.A.cols() != n || a.B_u.rows() != n || a.B_f.rows() != n || a.B_d.rows() != n ||
        a.C_y.cols() != n) {
        fail(where, "agent matrices have inconsistent row/column counts");
    }
    return a;
}

json agent_json(const design::AgentModel& a) {
    json j;
    j["A"] = matrix_json(a.A);
    j["B_u"] = matrix_json(a.B_u);
    j["B_f"] = matrix_json(a.B_f);
    j["B_d"] = matrix_json(a.B_d);
    j["C_y"] = matrix_json(a.C_y);
    j["f"] = {{"id", a.f.id}, {"gain", a.f.gain}};
    j["d"] = {{"id", a.d.id},
              {"amplitude", a.d.amplitude},
              {"angular_frequency", a.d.angular_frequency}};
    return j;
}

}  // namespace

Scenario parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("scenario: invalid JSON: ") + e.what());
    }

    Scenario s;
    s.name = j.value("name", "unnamed");

    const json& agents = field(j, "", "agents");
    if (!agents.is_array() || agents.empty()) fail("agents", "expected a non-empty array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        s.agents.push_back(parse_agent(agents[i], "agents[" + std::to_string(i) + "]"));
    }
    const int N = s.n_agents();

    const json& layer = field(j, "", "agent_layer");
    if (layer.contains("adjacency")) {
        s.agent_adjacency = matrix(layer.at("adjacency"), "agent_layer.adjacency");
        if (s.agent_adjacency.rows() != N || s.agent_adjacency.cols() != N) {
            fail("agent_layer.adjacency", "must be N x N");
        }
    } else if (layer.contains("bounds")) {
        const json& b = layer.at("bounds");
        graph::DesignerBounds db;
        db.norm_Aa = number(field(b, "agent_layer.bounds", "norm_Aa"), "agent_layer.bounds.norm_Aa");
        db.gamma_cy = number(field(b, "agent_layer.bounds", "gamma_cy"), "agent_layer.bounds.gamma_cy");
        db.gamma_f = number(field(b, "agent_layer.bounds", "gamma_f"), "agent_layer.bounds.gamma_f");
        s.asserted_bounds = db;
    } else {
        fail("agent_layer", "needs 'adjacency' or 'bounds'");
    }

    if (j.contains("sublayers_explicit")) {
        std::vector<ExplicitSublayer> subs;
        const json& se = j.at("sublayers_explicit");
        if (!se.is_array() || se.empty()) fail("sublayers_explicit", "expected a non-empty array");
        for (std::size_t k = 0; k < se.size(); ++k) {
            const std::string where = "sublayers_explicit[" + std::to_string(k) + "]";
            ExplicitSublayer sub;
            for (const auto& e : field(se[k], where, "edges")) {
                if (!e.is_array() || e.size() != 3) fail(where + ".edges", "expected [i, j, weight]");
                const int a = node_index(e[0], where + ".edges", N);
                const int b = node_index(e[1], where + ".edges", N);
                sub.edges.emplace_back(a, b, number(e[2], where + ".edges.weight"));
            }
            for (const auto& l : field(se[k], where, "selfloops")) {
                if (!l.is_array() || l.size() != 2) fail(where + ".selfloops", "expected [i, weight]");
                sub.selfloops.emplace_back(node_index(l[0], where + ".selfloops", N),
                                           number(l[1], where + ".selfloops.weight"));
            }
            subs.push_back(std::move(sub));
        }
        const int n_subs = static_cast<int>(subs.size());
        s.explicit_sublayers = std::move(subs);
        s.synthesis = synth::make_problem(n_subs, N, 1);
    } else {
        const json& sy = field(j, "", "synthesis");
        s.synthesis = synth::make_problem(integer(field(sy, "synthesis", "sublayers"), "synthesis.sublayers"),
                                          N,
                                          integer(field(sy, "synthesis", "selfloop_budget"),
                                                  "synthesis.selfloop_budget"));
        if (sy.contains("selfloop_capability")) {
            const json& caps = sy.at("selfloop_capability");
            if (!caps.is_array() || static_cast<int>(caps.size()) != N) {
                fail("synthesis.selfloop_capability", "expected N entries");
            }
            for (int i = 0; i < N; ++i) {
                s.synthesis.selfloop_capability[static_cast<std::size_t>(i)] =
                    integer(caps[static_cast<std::size_t>(i)], "synthesis.selfloop_capability") ? 1 : 0;
            }
        }
        if (sy.contains("high_risk_pairs")) {
            for (const auto& p : sy.at("high_risk_pairs")) {
                const auto [a, b] = pair_index(p, "synthesis.high_risk_pairs", N);
                s.synthesis.risk_mask[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 0;
                s.synthesis.risk_mask[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 0;
            }
        }
        if (sy.contains("seed")) s.synth_seed = sy.at("seed").get<std::uint64_t>();

        const json& w = field(j, "", "sublayer_weights");
        s.weight_rule.selfloop_weight = number(field(w, "sublayer_weights", "selfloop_weight"),
                                               "sublayer_weights.selfloop_weight");
        s.weight_rule.edge_weight_even_sum = number(field(w, "sublayer_weights", "edge_weight_even_sum"),
                                                    "sublayer_weights.edge_weight_even_sum");
        s.weight_rule.edge_weight_odd_sum = number(field(w, "sublayer_weights", "edge_weight_odd_sum"),
                                                   "sublayer_weights.edge_weight_odd_sum");
    }

    const json& dw = field(j, "", "design");
    Matrix Q_shared, R_shared;
    if (dw.contains("Q")) Q_shared = matrix(dw.at("Q"), "design.Q");
    if (dw.contains("R")) R_shared = matrix(dw.at("R"), "design.R");
    const double a_f = number(field(dw, "design", "a_f"), "design.a_f");
    const double a_d = number(field(dw, "design", "a_d"), "design.a_d");
    for (int i = 0; i < N; ++i) {
        design::DesignWeights wi;
        wi.a_f = a_f;
        wi.a_d = a_d;
        if (dw.contains("Q_per_agent")) {
            wi.Q = matrix(dw.at("Q_per_agent").at(static_cast<std::size_t>(i)),
                          "design.Q_per_agent[" + std::to_string(i) + "]");
        } else if (Q_shared.size() > 0) {
            wi.Q = Q_shared;
        } else {
            fail("design", "needs 'Q' or 'Q_per_agent'");
        }
        if (dw.contains("R_per_agent")) {
            wi.R = matrix(dw.at("R_per_agent").at(static_cast<std::size_t>(i)),
                          "design.R_per_agent[" + std::to_string(i) + "]");
        } else if (R_shared.size() > 0) {
            wi.R = R_shared;
        } else {
            fail("design", "needs 'R' or 'R_per_agent'");
        }
        s.weights.push_back(std::move(wi));
    }

    const int M = s.explicit_sublayers ? static_cast<int>(s.explicit_sublayers->size())
                                       : s.synthesis.n_sublayers;
    const json& sch = field(j, "", "schedule");
    s.schedule.type = field(sch, "schedule", "type").get<std::string>();
    if (s.schedule.type == "fixed") {
        s.schedule.fixed_mode = integer(field(sch, "schedule", "mode"), "schedule.mode") - 1;
        if (s.schedule.fixed_mode < 0 || s.schedule.fixed_mode >= M) {
            fail("schedule.mode", "sublayer index out of range");
        }
    } else if (s.schedule.type == "round_robin") {
        s.schedule.dwell = number(field(sch, "schedule", "dwell"), "schedule.dwell");
    } else if (s.schedule.type == "explicit") {
        for (const auto& t : field(sch, "schedule", "times")) {
            s.schedule.times.push_back(number(t, "schedule.times"));
        }
        for (const auto& mj : field(sch, "schedule", "modes")) {
            const int mode = integer(mj, "schedule.modes") - 1;
            if (mode < 0 || mode >= M) fail("schedule.modes", "sublayer index out of range");
            s.schedule.modes.push_back(mode);
        }
    } else {
        fail("schedule.type", "expected fixed | round_robin | explicit");
    }

    if (j.contains("attack")) {
        const json& at = j.at("attack");
        if (at.contains("pairs")) {
            for (const auto& p : at.at("pairs")) {
                s.attack.permanent_pairs.push_back(pair_index(p, "attack.pairs", N));
            }
        }
        if (at.contains("selfloops")) {
            for (const auto& l : at.at("selfloops")) {
                s.attack.permanent_selfloops.push_back(node_index(l, "attack.selfloops", N));
            }
        }
        if (at.contains("timed")) {
            for (std::size_t k = 0; k < at.at("timed").size(); ++k) {
                const json& tb = at.at("timed")[k];
                const std::string where = "attack.timed[" + std::to_string(k) + "]";
                sim::TimedBlock block;
                block.from = number(field(tb, where, "from"), where + ".from");
                block.to = number(field(tb, where, "to"), where + ".to");
                if (tb.contains("pairs")) {
                    for (const auto& p : tb.at("pairs")) {
                        block.pairs.push_back(pair_index(p, where + ".pairs", N));
                    }
                }
                if (tb.contains("selfloops")) {
                    for (const auto& l : tb.at("selfloops")) {
                        block.selfloops.push_back(node_index(l, where + ".selfloops", N));
                    }
                }
                s.attack.timed.push_back(std::move(block));
            }
        }
    }

    const json& sp = field(j, "", "sim");
    s.sim.step = number(field(sp, "sim", "step"), "sim.step");
    s.sim.horizon = number(field(sp, "sim", "horizon"), "sim.horizon");
    s.sim.x0 = vector(field(sp, "sim", "x0"), "sim.x0");
    s.sim.divergence_ceiling = sp.contains("divergence_ceiling")
                                   ? number(sp.at("divergence_ceiling"), "sim.divergence_ceiling")
                                   : 1e6;
    s.sim.zero_disturbance = sp.value("zero_disturbance", false);
    const int n_x = s.agents.front().n_x();
    if (s.sim.x0.size() != static_cast<Eigen::Index>(N) * n_x) {
        fail("sim.x0", "expected N * n_x entries");
    }
    return s;
}

Scenario load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::MissingInput, "cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string serialize(const Scenario& s) {
    json j;
    j["name"] = s.name;
    json agents = json::array();
    for (const auto& a : s.agents) agents.push_back(agent_json(a));
    j["agents"] = std::move(agents);

    if (s.agent_adjacency.size() > 0) {
        j["agent_layer"] = {{"adjacency", matrix_json(s.agent_adjacency)}};
    } else if (s.asserted_bounds) {
        j["agent_layer"] = {{"bounds",
                             {{"norm_Aa", s.asserted_bounds->norm_Aa},
                              {"gamma_cy", s.asserted_bounds->gamma_cy},
                              {"gamma_f", s.asserted_bounds->gamma_f}}}};
    }

    const int N = s.n_agents();
    if (s.explicit_sublayers) {
        json subs = json::array();
        for (const auto& sub : *s.explicit_sublayers) {
            json edges = json::array();
            for (const auto& [a, b, w] : sub.edges) edges.push_back({a + 1, b + 1, w});
            json loops = json::array();
            for (const auto& [i, w] : sub.selfloops) loops.push_back({i + 1, w});
            subs.push_back({{"edges", std::move(edges)}, {"selfloops", std::move(loops)}});
        }
        j["sublayers_explicit"] = std::move(subs);
    } else {
        json sy;
        sy["sublayers"] = s.synthesis.n_sublayers;
        sy["selfloop_budget"] = s.synthesis.selfloop_budget;
        sy["selfloop_capability"] = s.synthesis.selfloop_capability;
        json risk = json::array();
        for (int i = 0; i < N; ++i) {
            for (int k = i + 1; k < N; ++k) {
                if (s.synthesis.risk_mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] == 0) {
                    risk.push_back({i + 1, k + 1});
                }
            }
        }
        sy["high_risk_pairs"] = std::move(risk);
        if (s.synth_seed) sy["seed"] = *s.synth_seed;
        j["synthesis"] = std::move(sy);
        j["sublayer_weights"] = {{"selfloop_weight", s.weight_rule.selfloop_weight},
                                 {"edge_weight_even_sum", s.weight_rule.edge_weight_even_sum},
                                 {"edge_weight_odd_sum", s.weight_rule.edge_weight_odd_sum}};
    }

    json dw;
    bool shared_q = true, shared_r = true;
    for (const auto& w : s.weights) {
        if (w.Q != s.weights.front().Q) shared_q = false;
        if (w.R != s.weights.front().R) shared_r = false;
    }
    if (shared_q) {
        dw["Q"] = matrix_json(s.weights.front().Q);
    } else {
        json qs = json::array();
        for (const auto& w : s.weights) qs.push_back(matrix_json(w.Q));
        dw["Q_per_agent"] = std::move(qs);
    }
    if (shared_r) {
        dw["R"] = matrix_json(s.weights.front().R);
    } else {
        json rs = json::array();
        for (const auto& w : s.weights) rs.push_back(matrix_json(w.R));
        dw["R_per_agent"] = std::move(rs);
    }
    dw["a_f"] = s.weights.front().a_f;
    dw["a_d"] = s.weights.front().a_d;
    j["design"] = std::move(dw);

    json sch;
    sch["type"] = s.schedule.type;
    if (s.schedule.type == "fixed") sch["mode"] = s.schedule.fixed_mode + 1;
    if (s.schedule.type == "round_robin") sch["dwell"] = s.schedule.dwell;
    if (s.schedule.type == "explicit") {
        sch["times"] = s.schedule.times;
        json modes = json::array();
        for (int m : s.schedule.modes) modes.push_back(m + 1);
        sch["modes"] = std::move(modes);
    }
    j["schedule"] = std::move(sch);

    json at;
    json pairs = json::array();
    for (const auto& [a, b] : s.attack.permanent_pairs) pairs.push_back({a + 1, b + 1});
    at["pairs"] = std::move(pairs);
    json loops = json::array();
    for (int l : s.attack.permanent_selfloops) loops.push_back(l + 1);
    at["selfloops"] = std::move(loops);
    json timed = json::array();
    for (const auto& block : s.attack.timed) {
        json tb;
        tb["from"] = block.from;
        tb["to"] = block.to;
        json bp = json::array();
        for (const auto& [a, b] : block.pairs) bp.push_back({a + 1, b + 1});
        tb["pairs"] = std::move(bp);
        json bl = json::array();
        for (int l : block.selfloops) bl.push_back(l + 1);
        tb["selfloops"] = std::move(bl);
        timed.push_back(std::move(tb));
    }
    at["timed"] = std::move(timed);
    j["attack"] = std::move(at);

    j["sim"] = {{"step", s.sim.step},
                {"horizon", s.sim.horizon},
                {"x0", vector_json(s.sim.x0)},
                {"divergence_ceiling", s.sim.divergence_ceiling},
                {"zero_disturbance", s.sim.zero_disturbance}};
    return j.dump(2) + "\n";
}

graph::DesignerBounds designer_bounds(const Scenario& s) {
    if (s.asserted_bounds) return *s.asserted_bounds;
    graph::DesignerBounds b;
    b.norm_Aa = linalg::operator_norm(s.agent_adjacency);
    b.gamma_cy = 0.0;
    b.gamma_f = 0.0;
    for (const auto& a : s.agents) {
        const double cy = linalg::operator_norm(a.C_y);
        b.gamma_cy = std::max(b.gamma_cy, cy * cy);
        const double slope = sim::sector_slope(a.f);
        b.gamma_f = std::max(b.gamma_f, slope * slope);
    }
    if (b.gamma_f == 0.0) b.gamma_f = 1e-12;  // all-zero nonlinearities
    if (b.gamma_cy == 0.0) b.gamma_cy = 1e-12;
    return b;
}

sim::SwitchingSchedule build_schedule(const Scenario& s, int n_modes) {
    if (s.schedule.type == "fixed") {
        return sim::make_schedule({0.0}, {s.schedule.fixed_mode});
    }
    if (s.schedule.type == "round_robin") {
        return sim::round_robin_schedule(n_modes, s.schedule.dwell, s.sim.horizon);
    }
    return sim::make_schedule(s.schedule.times, s.schedule.modes);
}

graph::SublayerTopology apply_weight_rule(const graph::SublayerStructure& structure,
                                          const WeightRule& rule) {
    const int n = structure.n_nodes;
    Matrix w = Matrix::Zero(n, n);
    Vector sl = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (structure.selfloops[i]) sl(i) = rule.selfloop_weight;
        for (int j = 0; j < n; ++j) {
            if (i != j && structure.edges[i][j]) {
                // Parity of the 1-based label sum.
                w(i, j) = ((i + j) % 2 == 0) ? rule.edge_weight_even_sum : rule.edge_weight_odd_sum;
            }
        }
    }
    return graph::build_modified_laplacian(structure, w, sl);
}

graph::SublayerTopology build_explicit_sublayer(const ExplicitSublayer& spec, int n_nodes) {
    graph::SublayerStructure st = graph::make_structure(n_nodes);
    Matrix w = Matrix::Zero(n_nodes, n_nodes);
    Vector sl = Vector::Zero(n_nodes);
    for (const auto& [a, b, weight] : spec.edges) {
        st.edges[a][b] = st.edges[b][a] = 1;
        w(a, b) = w(b, a) = weight;
    }
    for (const auto& [i, weight] : spec.selfloops) {
        st.selfloops[i] = 1;
        sl(i) = weight;
    }
    return graph::build_modified_laplacian(st, w, sl);
}

}  // namespace mtd::scenario
