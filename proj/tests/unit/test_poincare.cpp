#include <doctest.h>

#include <cmath>
#include <vector>

#include <mmg/poincare.hpp>

#include "../support/test_support.hpp"

using namespace mmg;

namespace {

mmgtest::BuiltGraph path3() {
    return mmgtest::graph_from_adjacency({{0, 1}, {1, 2}}, 3, 1.0);
}

VertexFunction constant_fn(int n, double c) {
    VertexFunction u;
    u.values.assign(static_cast<std::size_t>(n), c);
    return u;
}

}  // namespace

TEST_CASE("discrete gradient") {
    auto space = SampledSpace::make_euclidean_lattice(1, Rational(1, 1), 8);
    auto net = build_maximal_net(space, 1.0, 1);
    auto g = build_graph(space, net);

    CHECK(discrete_gradient(g, constant_fn(g.vertex_count(), 3.5), 8) == 0.0);

    VertexFunction coord;
    coord.values.resize(static_cast<std::size_t>(g.vertex_count()));
    for (int v = 0; v < g.vertex_count(); ++v) {
        coord.values[static_cast<std::size_t>(v)] = g.vertex_point(v)[0];
    }
    // interior vertex: neighbors at distance 1, 2, 3 on both sides
    CHECK(discrete_gradient(g, coord, 8) == doctest::Approx(12.0));

    auto isolated = mmgtest::graph_from_adjacency({}, 1, 1.0);
    CHECK(discrete_gradient(isolated.graph, constant_fn(1, 5.0), 0) == 0.0);
}

TEST_CASE("pi sides on constants vanish") {
    auto built = path3();
    auto s = pi_sides(built.graph, {1, 2.0}, 1.0, 1.0, constant_fn(3, 4.25));
    CHECK(s.lhs == 0.0);
    CHECK(s.lhs_double == 0.0);
    CHECK(s.rhs == 0.0);
    CHECK_FALSE(s.pi_violated);
}

TEST_CASE("two-sided double-average equivalence, shift and scale invariance") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 4 + static_cast<int>(rng.below(20));
        auto built = mmgtest::random_connected_graph(n, 1.0, rng.next());
        const auto& g = built.graph;
        BallSpec ball{static_cast<int>(rng.below(static_cast<std::uint64_t>(n))),
                      2.0 + static_cast<double>(rng.below(3))};
        for (int rep = 0; rep < 5; ++rep) {
            auto u = mmgtest::dyadic_random_function(n, rng);
            for (double p : {1.0, 2.0, 3.0}) {
                PiSides s = pi_sides(g, ball, 1.0, p, u);
                CHECK(s.lhs <= s.lhs_double);        // exact, by construction
                CHECK(s.lhs_double <= 2.0 * s.lhs);  // exact slack in real arithmetic

                // shift invariance: dyadic values + dyadic shift stay exact
                for (double c : {1.0, -2.0, 0.25}) {
                    VertexFunction shifted = u;
                    for (double& v : shifted.values) v += c;
                    PiSides t = pi_sides(g, ball, 1.0, p, shifted);
                    CHECK(t.lhs == s.lhs);
                    CHECK(t.lhs_double == s.lhs_double);
                    CHECK(t.rhs == s.rhs);
                }
                // scale invariance at powers of two
                for (double a : {-2.0, 0.5}) {
                    VertexFunction scaled = u;
                    for (double& v : scaled.values) v *= a;
                    PiSides t = pi_sides(g, ball, 1.0, p, scaled);
                    double m = std::fabs(a);
                    CHECK(t.lhs == doctest::Approx(m * s.lhs).epsilon(1e-12));
                    CHECK(t.lhs_double == doctest::Approx(m * s.lhs_double).epsilon(1e-12));
                    CHECK(t.rhs == doctest::Approx(m * s.rhs).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("gradient form equivalence: per-edge power sum vs powered row sum") {
    // the inner-sum form and the |grad|^p form differ by at most deg^(p-1)
    // per vertex
    SplitMix64 rng(77);
    auto built = mmgtest::random_connected_graph(12, 1.0, 5);
    const auto& g = built.graph;
    for (int rep = 0; rep < 20; ++rep) {
        auto u = mmgtest::dyadic_random_function(12, rng);
        for (double p : {1.0, 2.0, 3.0}) {
            for (int a = 0; a < g.vertex_count(); ++a) {
                double inner = 0.0;
                for (int b : g.adjacency[static_cast<std::size_t>(a)]) {
                    inner += pow_p(std::fabs(u.values[static_cast<std::size_t>(b)] -
                                             u.values[static_cast<std::size_t>(a)]) /
                                       g.epsilon,
                                   p);
                }
                double powed = pow_p(discrete_gradient(g, u, a), p);
                double degf = std::pow(static_cast<double>(std::max(1, g.degree(a))), p - 1.0);
                CHECK(inner <= powed * (1.0 + 1e-12) + 1e-300);
                CHECK(powed <= degf * inner * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}

TEST_CASE("exact oracle on the three-vertex path") {
    auto built = path3();
    BallSpec ball{1, 2.0};
    auto exact = exact_constant_p1_tiny(built.graph, ball, 1.0);
    CHECK(exact.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // re-injecting the maximizer reproduces the constant
    PiSides s = pi_sides(built.graph, ball, 1.0, 1.0, exact.argmax);
    CHECK(pi_ratio(s) == doctest::Approx(exact.value).epsilon(1e-9));

    // the suite with ascent reaches the oracle value on this instance
    SuitePlan plan;
    auto est = estimate_constant_lower(built.graph, ball, 1.0, 1.0, plan, 12);
    CHECK(est.C_lower == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    REQUIRE(est.C_exact.has_value());
    CHECK(*est.C_exact == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(est.C_lower <= *est.C_exact * (1.0 + 1e-9));
}

TEST_CASE("exact oracle on two connected vertices has the closed form 1/(2r)") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 2, 1.0);
    for (double r : {1.5, 2.0, 3.0}) {
        auto exact = exact_constant_p1_tiny(built.graph, {0, r}, 1.0);
        CHECK(exact.value == doctest::Approx(1.0 / (2.0 * r)).epsilon(1e-12));
    }
    // strict balls: radius 1 = epsilon keeps only the center, so the
    // constant degenerates to zero
    CHECK(exact_constant_p1_tiny(built.graph, {0, 1.0}, 1.0).value == 0.0);
}

TEST_CASE("oracle dominates every suite ratio on random tiny graphs") {
    SplitMix64 rng(2025);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 3 + static_cast<int>(rng.below(4));
        auto built = mmgtest::random_connected_graph(n, 1.0, rng.next());
        BallSpec ball{0, 2.0 + static_cast<double>(rng.below(2))};
        auto exact = exact_constant_p1_tiny(built.graph, ball, 1.0);
        SuitePlan plan;
        auto est = estimate_constant_lower(built.graph, ball, 1.0, 1.0, plan, rng.next());
        CHECK(est.C_lower <= exact.value * (1.0 + 1e-9) + 1e-12);
        PiSides s = pi_sides(built.graph, ball, 1.0, 1.0, exact.argmax);
        CHECK(pi_ratio(s) == doctest::Approx(exact.value).epsilon(1e-9));
    }
}

TEST_CASE("oracle size guard") {
    auto built = mmgtest::random_connected_graph(10, 1.0, 3);
    CHECK_THROWS_AS(exact_constant_p1_tiny(built.graph, {0, 10.0}, 1.0), std::invalid_argument);
}

TEST_CASE("singleton ball gives zero constant") {
    auto built = path3();
    SuitePlan plan;
    auto est = estimate_constant_lower(built.graph, {0, 0.5}, 1.0, 1.0, plan, 3);
    CHECK(est.C_lower == 0.0);
}

TEST_CASE("holder monotonicity per test function") {
    auto built = mmgtest::random_connected_graph(14, 1.0, 9);
    SuitePlan plan;
    auto rep = holder_lift(built.graph, {0, 3.0}, 1.0, 1.0, 2.0, plan, 4);
    CHECK(rep.all_ok);
    auto rep23 = holder_lift(built.graph, {0, 3.0}, 1.0, 2.0, 3.0, plan, 4);
    CHECK(rep23.all_ok);
    bool nontrivial = false;
    for (const auto& r : rep.records) {
        if (r.ratio_p > 0.0) nontrivial = true;
    }
    CHECK(nontrivial);
}

TEST_CASE("zero gradient on a connected lambda-ball forces constants") {
    auto built = mmgtest::random_connected_graph(8, 1.0, 17);
    const auto& g = built.graph;
    auto u = constant_fn(8, 2.0);
    PiSides s = pi_sides(g, {0, 3.0}, 1.0, 1.0, u);
    CHECK(s.rhs == 0.0);
    CHECK(s.lhs == 0.0);
    CHECK_FALSE(s.pi_violated);
}

TEST_CASE("p=2 spectral heuristic runs on small balls") {
    auto built = mmgtest::random_connected_graph(10, 1.0, 23);
    SuitePlan plan;
    auto est = estimate_constant_lower(built.graph, {0, 2.0}, 1.0, 2.0, plan, 5);
    // flagged heuristic: recorded alongside, not asserted against C_lower
    CHECK(est.C_lower >= 0.0);
    if (est.C_upper_heuristic) CHECK(std::isfinite(*est.C_upper_heuristic));
}

TEST_CASE("estimate on a dyadic-grid graph ball stays under 256") {
    auto built = mmgtest::dyadic_grid(3, 12);
    int origin = -1;
    for (int v = 0; v < built.graph.vertex_count(); ++v) {
        auto p = built.graph.vertex_point(v);
        if (p[0] == 0.0 && p[1] == 0.0) origin = v;
    }
    REQUIRE(origin >= 0);
    SuitePlan plan;
    plan.ascent_steps = 120;
    auto est = estimate_constant_lower(built.graph, {origin, 1.0}, 1.0, 1.0, plan, 21);
    CHECK(est.C_lower > 0.0);
    CHECK(est.C_lower <= 256.0);
    CHECK_FALSE(est.disconnected_lambda_ball);

    // a tiny ball on a high-degree graph: the oracle guard must not leak
    auto singleton = estimate_constant_lower(built.graph, {origin, 0.5 * built.graph.epsilon},
                                             1.0, 1.0, plan, 22);
    CHECK(singleton.C_lower == 0.0);
}

TEST_CASE("grid pi certificate: chain bound and the 256 constant") {
    auto rep = grid_pi_certificate(3, 2, 64, 7);
    CHECK(rep.chain_ok);
    CHECK(rep.max_chain_step_sq <= 9);
    CHECK(rep.telescope_violations == 0);
    CHECK(rep.pairs_checked > 0);
    CHECK(rep.empirical_C_single <= 256.0);
    CHECK(rep.empirical_C_double <= 256.0);
    CHECK(rep.bound_256_ok);

    auto tiny = grid_pi_certificate(2, 1, 16, 3);
    CHECK(tiny.chain_ok);
    CHECK(tiny.bound_256_ok);
}
