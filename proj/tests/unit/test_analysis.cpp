#include <doctest.h>

#include <cmath>

#include <mmg/analysis.hpp>

#include "../support/test_support.hpp"

using namespace mmg;

TEST_CASE("plane Lebesgue doubling ratio is exactly 4") {
    auto space = SampledSpace::make_euclidean_lattice(2, Rational(1, 2), 6);
    auto rep = estimate_doubling_space(space, {0.3, 1.0, 2.5}, 16, 7);
    CHECK(rep.max_ratio == 4.0);
    for (const auto& row : rep.table) CHECK(row[2] == 4.0);
}

TEST_CASE("theoretical bounds") {
    auto b = theoretical_bounds(4.0, 1.0);
    CHECK(b.degree_bound == 256.0);
    CHECK(b.alpha == 1);
    CHECK(b.C_m_bound == doctest::Approx(std::pow(4.0, 10.0)));

    auto unit = theoretical_bounds(1.0, 1.0);
    CHECK(unit.degree_bound == 1.0);
    CHECK(unit.C_m_bound == 1.0);

    auto q = theoretical_bounds(4.0, 3.0);
    CHECK(q.alpha == 2);
    CHECK(q.C_m_bound == doctest::Approx(std::pow(4.0, 12.0)));

    CHECK_THROWS_AS(theoretical_bounds(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(theoretical_bounds(2.0, 0.5), std::invalid_argument);
}

TEST_CASE("grid graph doubling stays under the stated constant 7128") {
    auto built = mmgtest::dyadic_grid(3, 24);
    auto radii = log_spaced(built.graph.epsilon, 6.0 * built.graph.epsilon, 6);
    auto rep = estimate_doubling_graph(built.graph, radii, 32, 3);
    CHECK(rep.max_ratio <= 7128.0);
    CHECK(rep.max_ratio <= theoretical_bounds(4.0, 1.0).C_m_bound);
    CHECK(rep.max_ratio >= 1.0);
    CHECK(rep.witness_center >= 0);
}

TEST_CASE("far components: no growth means ratio 1") {
    // two components: an edge pair and an isolated vertex far away
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 3, 1.0);
    // all balls in the small component stop growing once they contain it
    auto rep = estimate_doubling_graph(built.graph, {2.5}, 8, 5);
    CHECK(rep.max_ratio == 1.0);
}

TEST_CASE("comparability at r = epsilon gives ratio exactly 1") {
    auto built = mmgtest::dyadic_grid(3, 12);
    auto rep = comparability(*built.space, built.graph, {built.graph.epsilon}, 16, 9);
    CHECK(rep.K_lower == 1.0);
    CHECK(rep.K_upper == 1.0);
    CHECK(rep.K == 1.0);
}

TEST_CASE("comparability rejects radii below epsilon") {
    auto built = mmgtest::dyadic_grid(3, 8);
    CHECK_THROWS_AS(comparability(*built.space, built.graph, {built.graph.epsilon / 2.0}, 8, 1),
                    std::invalid_argument);
}

TEST_CASE("comparability is finite at dyadic radii") {
    auto built = mmgtest::dyadic_grid(3, 28);
    const double eps = built.graph.epsilon;
    auto rep = comparability(*built.space, built.graph, {2.0 * eps, 4.0 * eps, 8.0 * eps}, 24, 4);
    CHECK(std::isfinite(rep.K));
    CHECK(rep.K >= 1.0);
    CHECK(rep.K_lower > 0.0);
    // exhaustive oracle at r = 2*eps on interior centers: |B_V| = 29,
    // m = 29*pi*eps^2, mu = pi*(2 eps)^2 -> ratio 29/4
    bool found = false;
    for (const auto& row : rep.table) {
        if (row[1] == 2.0 * eps) {
            CHECK(row[2] == doctest::Approx(29.0 / 4.0).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("distortion on a single edge at distance 2*eps") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 2, 1.0);
    SamplePlan plan;
    plan.sources = 2;
    plan.pairs = 4;
    auto rep = distortion(*built.space, built.graph, plan, 3);
    CHECK(rep.max_dv_over_dx == doctest::Approx(0.5));
    CHECK(rep.max_dx_over_dv == doctest::Approx(2.0));
    CHECK(rep.upper_bound_violations == 0);
    CHECK(rep.connected_fraction == 1.0);
    CHECK(rep.L_estimate == 1.0);  // clipped at 1
}

TEST_CASE("distortion on the dyadic grid") {
    auto built = mmgtest::dyadic_grid(3, 16);
    SamplePlan plan;
    plan.sources = 24;
    plan.pairs = 1200;
    auto rep = distortion(*built.space, built.graph, plan, 11);
    CHECK(rep.upper_bound_violations == 0);
    CHECK(rep.max_dx_over_dv <= 3.0 + 1e-12);
    CHECK(rep.max_dv_over_dx <= 2.0 + 1e-12);  // Prop bound with L = 1
    CHECK(rep.declared_consistent);
    CHECK(std::isfinite(rep.L_estimate));
    CHECK(rep.connected_fraction == 1.0);
}

TEST_CASE("disconnected pairs only lower the connected fraction") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 4, 1.0);  // 2 isolated vertices
    SamplePlan plan;
    plan.sources = 4;
    plan.pairs = 12;
    auto rep = distortion(*built.space, built.graph, plan, 3);
    CHECK(rep.connected_fraction < 1.0);
    CHECK(rep.upper_bound_violations == 0);
}

TEST_CASE("max degree respects the metric doubling witness bound") {
    auto built = mmgtest::dyadic_grid(4, 12);
    auto space_doubling = estimate_doubling_space(*built.space, {0.3, 0.9}, 16, 2);
    auto bounds = theoretical_bounds(space_doubling.max_ratio, 1.0);
    CHECK(built.graph.max_degree() <= bounds.degree_bound);
}
