#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtd/errors.hpp"
#include "mtd/graph.hpp"

#include <cmath>

using namespace mtd;
using namespace mtd::graph;

namespace {

/// Random structure in which every component is guaranteed a selfloop:
/// nodes are partitioned into chains hanging off selfloop roots.
SublayerStructure random_valid_structure(int n, linalg::SplitMix64& rng) {
    SublayerStructure s = make_structure(n);
    std::vector<int> anchored;  // nodes already connected to a selfloop component
    for (int v = 0; v < n; ++v) {
        if (anchored.empty() || rng.next_double() < 0.35) {
            s.selfloops[v] = 1;
        } else {
            const int target = anchored[static_cast<std::size_t>(rng.below(anchored.size()))];
            s.edges[v][target] = s.edges[target][v] = 1;
        }
        anchored.push_back(v);
    }
    return s;
}

SublayerTopology random_valid_topology(int n, linalg::SplitMix64& rng) {
    const SublayerStructure s = random_valid_structure(n, rng);
    Matrix w = Matrix::Zero(n, n);
    Vector sl = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (s.selfloops[i]) sl(i) = rng.uniform(0.5, 4.0);
        for (int j = i + 1; j < n; ++j) {
            if (s.edges[i][j]) w(i, j) = w(j, i) = rng.uniform(0.5, 4.0);
        }
    }
    return build_modified_laplacian(s, w, sl);
}

}  // namespace

TEST_CASE("single node with selfloop weight 3") {
    SublayerStructure s = make_structure(1);
    s.selfloops[0] = 1;
    Vector sl(1);
    sl << 3.0;
    const auto topo = build_modified_laplacian(s, Matrix::Zero(1, 1), sl);
    CHECK(topo.laplacian(0, 0) == 3.0);
    CHECK(topo.spectrum(0) == doctest::Approx(3.0));
}

TEST_CASE("two nodes, one edge, one selfloop: closed-form spectrum") {
    SublayerStructure s = make_structure(2);
    s.selfloops[0] = 1;
    s.edges[0][1] = s.edges[1][0] = 1;
    Matrix w(2, 2);
    w << 0, 1, 1, 0;
    Vector sl(2);
    sl << 1.0, 0.0;
    const auto topo = build_modified_laplacian(s, w, sl);
    Matrix expected(2, 2);
    expected << 2, -1, -1, 1;
    CHECK((topo.laplacian - expected).norm() < 1e-14);
    const double lo = (3.0 - std::sqrt(5.0)) / 2.0;
    const double hi = (3.0 + std::sqrt(5.0)) / 2.0;
    CHECK(topo.spectrum(0) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(topo.spectrum(1) == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("two isolated selfloops give the identity") {
    SublayerStructure s = make_structure(2);
    s.selfloops[0] = s.selfloops[1] = 1;
    Vector sl(2);
    sl << 1.0, 1.0;
    const auto topo = build_modified_laplacian(s, Matrix::Zero(2, 2), sl);
    CHECK((topo.laplacian - Matrix::Identity(2, 2)).norm() == 0.0);
    CHECK(topo.spectrum(0) == doctest::Approx(1.0));
    CHECK(topo.spectrum(1) == doctest::Approx(1.0));
}

TEST_CASE("weight/structure mismatches are rejected") {
    SublayerStructure s = make_structure(2);
    s.selfloops[0] = 1;
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = w(1, 0) = 1.0;  // weight on an absent edge
    Vector sl(2);
    sl << 1.0, 0.0;
    CHECK_THROWS_AS(build_modified_laplacian(s, w, sl), Error);

    s.edges[0][1] = s.edges[1][0] = 1;
    Matrix asym = Matrix::Zero(2, 2);
    asym(0, 1) = 1.0;
    asym(1, 0) = 2.0;
    CHECK_THROWS_AS(build_modified_laplacian(s, asym, sl), Error);
}

TEST_CASE("laplacian_spectrum trivia") {
    CHECK(laplacian_spectrum(Matrix::Identity(3, 3))(0) == doctest::Approx(1.0));
    Matrix D = Matrix::Zero(3, 3);
    D.diagonal() << 5, 2, 9;
    const Vector ev = laplacian_spectrum(D);
    CHECK(ev(0) == doctest::Approx(2));
    CHECK(ev(2) == doctest::Approx(9));
    Matrix bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(laplacian_spectrum(bad), Error);
}

TEST_CASE("validate_sublayer component reports") {
    SublayerStructure s = make_structure(2);
    s.selfloops[0] = 1;
    s.edges[0][1] = s.edges[1][0] = 1;
    CHECK(validate_sublayer(s).valid);

    SublayerStructure isolated = make_structure(2);
    isolated.selfloops[0] = 1;
    const auto report = validate_sublayer(isolated);
    CHECK_FALSE(report.valid);
    REQUIRE(report.components_without_selfloop.size() == 1);
    CHECK(report.components[static_cast<std::size_t>(report.components_without_selfloop[0])] ==
          std::vector<int>{1});

    SublayerStructure star = make_structure(4);
    star.selfloops[0] = 1;
    for (int leaf = 1; leaf < 4; ++leaf) star.edges[0][leaf] = star.edges[leaf][0] = 1;
    const auto star_report = validate_sublayer(star);
    CHECK(star_report.valid);
    CHECK(star_report.components.size() == 1);
}

TEST_CASE("mu_min over sublayers") {
    SublayerStructure id2 = make_structure(2);
    id2.selfloops[0] = id2.selfloops[1] = 1;
    Vector ones2(2);
    ones2 << 1.0, 1.0;
    const auto eye = build_modified_laplacian(id2, Matrix::Zero(2, 2), ones2);
    Vector twos(2);
    twos << 2.0, 2.0;
    const auto twice = build_modified_laplacian(id2, Matrix::Zero(2, 2), twos);
    CHECK(mu_min({eye, twice}) == doctest::Approx(1.0));

    SublayerStructure one = make_structure(1);
    one.selfloops[0] = 1;
    Vector three(1);
    three << 3.0;
    const auto single = build_modified_laplacian(one, Matrix::Zero(1, 1), three);
    CHECK(mu_min({single}) == doctest::Approx(3.0));

    SublayerStructure mixed = make_structure(2);
    mixed.selfloops[0] = 1;
    mixed.edges[0][1] = mixed.edges[1][0] = 1;
    Matrix w(2, 2);
    w << 0, 1, 1, 0;
    Vector sl(2);
    sl << 1.0, 0.0;
    const auto mixed_topo = build_modified_laplacian(mixed, w, sl);
    CHECK(mu_min({mixed_topo, eye}) ==
          doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("mu_min rejects a sublayer with zero eigenvalue") {
    // An edge-only pair has component without selfloop: spectrum reaches 0.
    SublayerStructure s = make_structure(2);
    s.edges[0][1] = s.edges[1][0] = 1;
    Matrix w(2, 2);
    w << 0, 1, 1, 0;
    const auto topo = build_modified_laplacian(s, w, Vector::Zero(2));
    CHECK_THROWS_AS(mu_min({topo}), Error);
}

TEST_CASE("property: valid structures yield strictly positive spectra") {
    linalg::SplitMix64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(12));
        const auto topo = random_valid_topology(n, rng);
        REQUIRE(validate_sublayer(topo.structure).valid);
        CHECK(topo.spectrum(0) > 0.0);
    }
}

TEST_CASE("property: row sums equal the selfloop weights") {
    linalg::SplitMix64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(10));
        const auto topo = random_valid_topology(n, rng);
        const Vector row_sums = topo.laplacian.rowwise().sum();
        CHECK((row_sums - topo.selfloop_weights).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("property: spectrum is invariant under node relabeling") {
    linalg::SplitMix64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));
        const auto topo = random_valid_topology(n, rng);
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        Matrix Pm = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) Pm(perm[static_cast<std::size_t>(i)], i) = 1.0;
        const Matrix H_perm = Pm * topo.laplacian * Pm.transpose();
        const Vector ev = laplacian_spectrum(H_perm);
        CHECK((ev - topo.spectrum).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, topo.laplacian.norm()));
    }
}

TEST_CASE("property: adding a sublayer can only lower mu_min") {
    linalg::SplitMix64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(8));
        std::vector<SublayerTopology> layer{random_valid_topology(n, rng)};
        const double before = mu_min(layer);
        layer.push_back(random_valid_topology(n, rng));
        CHECK(mu_min(layer) <= before + 1e-15);
    }
}

TEST_CASE("agent layer neighbor sets track the nonzero pattern") {
    Matrix A = Matrix::Zero(3, 3);
    A(0, 1) = 1.0;
    A(0, 0) = -1.0;
    A(2, 1) = 0.5;
    const auto g = make_agent_layer(A);
    CHECK(g.neighbor_set(0) == std::vector<int>{0, 1});
    CHECK(g.neighbor_set(1).empty());
    CHECK(g.neighbor_set(2) == std::vector<int>{1});
}
