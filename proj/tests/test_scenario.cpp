#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtd/bundled.hpp"
#include "mtd/errors.hpp"
#include "mtd/pipeline.hpp"
#include "mtd/scenario.hpp"

using namespace mtd;
using namespace mtd::scenario;

TEST_CASE("bundled scenarios round-trip through JSON") {
    for (const auto& name : bundled::names()) {
        const Scenario original = bundled::by_name(name);
        const std::string once = serialize(original);
        const Scenario reparsed = parse(once);
        const std::string twice = serialize(reparsed);
        CHECK(once == twice);
        CHECK(reparsed.name == original.name);
        CHECK(reparsed.n_agents() == original.n_agents());
        CHECK((reparsed.agent_adjacency - original.agent_adjacency).norm() == 0.0);
        CHECK(reparsed.synthesis.selfloop_capability == original.synthesis.selfloop_capability);
        CHECK(reparsed.attack.permanent_pairs == original.attack.permanent_pairs);
        CHECK(reparsed.attack.timed.size() == original.attack.timed.size());
        CHECK(reparsed.sim.step == original.sim.step);
        CHECK((reparsed.sim.x0 - original.sim.x0).norm() == 0.0);
    }
}

TEST_CASE("designer bounds derived from the bundled adjacency") {
    const Scenario s = bundled::fig4();
    const auto b = designer_bounds(s);
    CHECK(b.gamma_cy == doctest::Approx(1.0));   // unit-norm C rows
    CHECK(b.gamma_f == doctest::Approx(0.25));   // max slope 0.5, squared
    CHECK(b.norm_Aa == doctest::Approx(linalg::operator_norm(s.agent_adjacency)).epsilon(1e-12));
}

TEST_CASE("schema violations carry the offending field") {
    CHECK_THROWS_AS(parse("not json at all"), Error);

    try {
        parse(R"({"agents": []})");
        FAIL("expected schema error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaViolation);
        CHECK(std::string(e.what()).find("agents") != std::string::npos);
    }
}

TEST_CASE("referential integrity: out-of-range indices are rejected") {
    Scenario s = bundled::fig3();
    std::string text = serialize(s);
    // Corrupt a pair to reference node 9 of 8.
    const auto pos = text.find("\"pairs\"");
    REQUIRE(pos != std::string::npos);
    // Cheaper than string surgery: mutate through the struct and re-serialize.
    s.attack.permanent_pairs.push_back({7, 8});  // node 9, 0-based 8 -> out of range
    CHECK_THROWS_AS(parse(serialize(s)), Error);

    Scenario bad_mode = bundled::fig3();
    bad_mode.schedule.fixed_mode = 7;  // only 5 sublayers
    CHECK_THROWS_AS(parse(serialize(bad_mode)), Error);
}

TEST_CASE("explicit sublayers bypass synthesis") {
    Scenario s = bundled::decay();
    std::vector<ExplicitSublayer> subs(2);
    subs[0].selfloops = {{0, 2.0}};
    subs[0].edges = {{0, 1, 1.0}};
    for (int i = 2; i < 8; ++i) subs[0].selfloops.push_back({i, 1.0});
    subs[1].selfloops = {{1, 1.0}};
    subs[1].edges = {{1, 2, 2.0}};
    for (int i = 3; i < 8; ++i) subs[1].selfloops.push_back({i, 1.0});
    subs[1].selfloops.push_back({0, 1.0});
    s.explicit_sublayers = subs;

    const std::string text = serialize(s);
    const Scenario reparsed = parse(text);
    REQUIRE(reparsed.explicit_sublayers.has_value());
    CHECK(reparsed.explicit_sublayers->size() == 2);
    const auto topo = build_explicit_sublayer((*reparsed.explicit_sublayers)[0], 8);
    CHECK(topo.laplacian(0, 0) == doctest::Approx(3.0));  // selfloop 2 + edge 1
    CHECK(topo.laplacian(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("bundled attack links reference links that exist in their sublayer") {
    // Window w of the rolling attack targets sublayer 5-w; the blocked triple
    // must consist of that sublayer's own links (one selfloop, two edges).
    const Scenario s = bundled::fig4();
    const auto synth_result = mtd::pipeline::run_synth(s);
    REQUIRE(s.attack.timed.size() == 5);
    for (std::size_t w = 0; w < 5; ++w) {
        const auto& block = s.attack.timed[w];
        const auto& topo = synth_result.layer.sublayers[4 - w];
        REQUIRE(block.selfloops.size() == 1);
        REQUIRE(block.pairs.size() == 2);
        CHECK(topo.structure.selfloops[static_cast<std::size_t>(block.selfloops[0])] == 1);
        for (const auto& [a, b] : block.pairs) {
            CHECK(topo.structure.edges[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] == 1);
        }
        CHECK(block.from == 2.0 * static_cast<double>(w));
        CHECK(block.to == 2.0 * static_cast<double>(w + 1));
    }

    // The fixed-topology run blocks three links of sublayer 1.
    const Scenario f3 = bundled::fig3();
    const auto& sub1 = synth_result.layer.sublayers[0];
    REQUIRE(f3.attack.permanent_selfloops.size() == 1);
    CHECK(sub1.structure.selfloops[static_cast<std::size_t>(f3.attack.permanent_selfloops[0])] == 1);
    int present = 0;
    for (const auto& [a, b] : f3.attack.permanent_pairs) {
        present += sub1.structure.edges[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    CHECK(present == 2);  // two sublayer-1 edges on top of the high-risk pairs
}

TEST_CASE("weight rule parity assignment") {
    graph::SublayerStructure st = graph::make_structure(3);
    st.selfloops[0] = 1;
    st.edges[0][1] = st.edges[1][0] = 1;  // labels 1,2 -> odd sum
    st.edges[0][2] = st.edges[2][0] = 1;  // labels 1,3 -> even sum
    WeightRule rule{4.0, 4.0, 2.0};
    const auto topo = apply_weight_rule(st, rule);
    CHECK(topo.edge_weights(0, 1) == 2.0);
    CHECK(topo.edge_weights(0, 2) == 4.0);
    CHECK(topo.selfloop_weights(0) == 4.0);
}
