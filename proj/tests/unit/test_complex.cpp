#include <doctest.h>

#include <cmath>
#include <vector>

#include <mmg/one_complex.hpp>

#include "../support/test_support.hpp"

using namespace mmg;

TEST_CASE("single edge becomes one interval of length eps") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 2, 1.0);
    auto c = build_complex(*built.space, built.graph, ComplexMetricMode::graph_derived);
    CHECK(c.edge_count() == 1);
    CHECK(c.edge_measure(0) == built.graph.masses[0] + built.graph.masses[1]);
}

TEST_CASE("edge count matches the handshake identity") {
    auto grid = mmgtest::dyadic_grid(2, 8);
    auto c = build_complex(*grid.space, grid.graph, ComplexMetricMode::graph_derived);
    std::size_t degree_sum = 0;
    for (int v = 0; v < grid.graph.vertex_count(); ++v) {
        degree_sum += static_cast<std::size_t>(grid.graph.degree(v));
    }
    CHECK(c.edge_count() == degree_sum / 2);
}

TEST_CASE("rebased mode reproduces space distances on vertices") {
    auto grid = mmgtest::dyadic_grid(3, 8);
    auto c = build_complex(*grid.space, grid.graph, ComplexMetricMode::space_derived);
    auto ct = build_complex(*grid.space, grid.graph, ComplexMetricMode::graph_derived);
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.graph.vertex_count())));
        int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(grid.graph.vertex_count())));
        double expect = grid.space->distance(grid.graph.net.member_indices[static_cast<std::size_t>(a)],
                                             grid.graph.net.member_indices[static_cast<std::size_t>(b)]);
        CHECK(c.vertex_metric(a, b) == expect);
        CHECK(ct.vertex_metric(a, b) == graph_distance(grid.graph, a, b));
    }
}

TEST_CASE("complex distances: shortcut and four-path routing") {
    // path graph 0-1-2 with edges (0,1), (1,2)
    auto built = mmgtest::graph_from_adjacency({{0, 1}, {1, 2}}, 3, 1.0);
    auto c = build_complex(*built.space, built.graph, ComplexMetricMode::graph_derived);
    const double eps = c.epsilon();

    // same edge: within-edge shortcut
    auto p = c.edge_point(0, 0.2 * eps);
    auto q = c.edge_point(0, 0.7 * eps);
    CHECK(c.distance(p, q) == doctest::Approx(0.5 * eps).epsilon(1e-12));

    // vertex to midpoint of incident edge
    auto mid = c.edge_point(0, 0.5 * eps);
    CHECK(c.distance(c.vertex_point(0), mid) == doctest::Approx(0.5 * eps).epsilon(1e-12));

    // midpoints of adjacent edges share vertex 1: eps/2 + eps/2
    auto mid2 = c.edge_point(1, 0.5 * eps);
    double d = c.distance(mid, mid2);
    CHECK(d == doctest::Approx(eps).epsilon(1e-12));
    // explicit four-path enumeration agrees
    double best = std::numeric_limits<double>::infinity();
    const auto& e0 = c.edge(0);
    const auto& e1 = c.edge(1);
    for (auto [end0, leg0] : {std::pair{e0.a, 0.5 * eps}, std::pair{e0.b, 0.5 * eps}}) {
        for (auto [end1, leg1] : {std::pair{e1.a, 0.5 * eps}, std::pair{e1.b, 0.5 * eps}}) {
            best = std::min(best, leg0 + c.vertex_metric(end0, end1) + leg1);
        }
    }
    CHECK(d == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("edge measure and ball mass formulas") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 4, 1.0,
                                               {1.0, 2.0, 3.0, 4.0});
    auto c = build_complex(*built.space, built.graph, ComplexMetricMode::graph_derived);
    ComplexMeasure cm(c);
    const double eps = c.epsilon();
    const auto& g = built.graph;

    // m_bar(full edge) = m(a) + m(b), exactly
    for (int e = 0; e < static_cast<int>(c.edge_count()); ++e) {
        const auto& ed = c.edge(e);
        CHECK(c.edge_measure(e) == g.masses[static_cast<std::size_t>(ed.a)] +
                                       g.masses[static_cast<std::size_t>(ed.b)]);
    }

    // ball of radius eps/4 around a vertex: (1/4) of each incident edge
    for (int v = 0; v < g.vertex_count(); ++v) {
        double expect = 0.0;
        for (int e : c.incident_edges(v)) expect += 0.25 * c.edge_measure(e);
        CHECK(cm.ball_mass(c.vertex_point(v), eps / 4.0) ==
              doctest::Approx(expect).epsilon(1e-12));
    }

    // additivity: a ball reaching exactly one full edge and nothing else
    auto two = mmgtest::graph_from_adjacency({{0, 1}}, 2, 1.0);
    auto c2 = build_complex(*two.space, two.graph, ComplexMetricMode::graph_derived);
    ComplexMeasure cm2(c2);
    double full = cm2.ball_mass(c2.edge_point(0, 0.5 * c2.epsilon()), 0.75 * c2.epsilon());
    CHECK(full == doctest::Approx(c2.edge_measure(0)).epsilon(1e-12));

    // monotone in radius
    double prev = 0.0;
    for (double r : {0.1, 0.3, 0.6, 1.0, 2.0}) {
        double m = cm.ball_mass(c.vertex_point(0), r * eps);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("complex doubling on the dyadic grid is finite") {
    auto grid = mmgtest::dyadic_grid(3, 10);
    auto c = build_complex(*grid.space, grid.graph, ComplexMetricMode::graph_derived);
    const double eps = c.epsilon();
    auto rep = estimate_doubling_complex(c, {0.3 * eps, eps, 2.0 * eps}, 24, 5);
    CHECK(std::isfinite(rep.max_ratio));
    CHECK(rep.max_ratio >= 1.0);
    CHECK(rep.max_ratio < 1e4);
}

TEST_CASE("linear interpolation minimizes edge energy") {
    auto built = mmgtest::random_connected_graph(8, 1.0, 31);
    auto c = build_complex(*built.space, built.graph, ComplexMetricMode::graph_derived);
    SplitMix64 rng(7);
    auto u = mmgtest::dyadic_random_function(8, rng);
    for (double p : {1.0, 2.0, 3.0}) {
        auto rep = linear_extension_energy(c, u, p, 20, 11);
        CHECK(rep.violations == 0);
        CHECK(rep.min_margin >= 0.0);
        CHECK(rep.edges_checked == static_cast<long>(c.edge_count()));
    }
    // equal endpoints: linear energy zero, every perturbation is above
    VertexFunction flat;
    flat.values.assign(8, 1.5);
    auto rep = linear_extension_energy(c, flat, 2.0, 20, 13);
    CHECK(rep.linear_energy_total == 0.0);
    CHECK(rep.violations == 0);
}

TEST_CASE("complex pi check produces finite ratios") {
    auto grid = mmgtest::dyadic_grid(3, 10);
    auto c = build_complex(*grid.space, grid.graph, ComplexMetricMode::graph_derived);
    ComplexMeasure cm(c);
    int origin = -1;
    for (int v = 0; v < grid.graph.vertex_count(); ++v) {
        auto p = grid.graph.vertex_point(v);
        if (p[0] == 0.0 && p[1] == 0.0) origin = v;
    }
    REQUIRE(origin >= 0);
    SuitePlan plan;
    plan.ascent_steps = 0;

    // case 1: r <= eps around a vertex
    auto small = complex_pi_check(c, cm, c.vertex_point(origin), 0.75 * c.epsilon(), 1.0, 1.0,
                                  plan, 3);
    CHECK(small.case1);
    CHECK(std::isfinite(small.best_ratio));
    CHECK(small.best_ratio > 0.0);

    // larger ball: ratio recorded against the base graph with the factor
    auto large = complex_pi_check(c, cm, c.vertex_point(origin), 3.0 * c.epsilon(), 1.0, 1.0,
                                  plan, 3);
    CHECK_FALSE(large.case1);
    CHECK(std::isfinite(large.best_ratio));
    CHECK(large.best_ratio > 0.0);
    CHECK(large.base_graph_ratio > 0.0);
    CHECK(large.factor > 0.0);
    CHECK(large.factor < 50.0);
}

TEST_CASE("the two complex metrics are bi-Lipschitz within the measured constant") {
    auto grid = mmgtest::dyadic_grid(3, 10);
    auto tilde = build_complex(*grid.space, grid.graph, ComplexMetricMode::graph_derived);
    auto rebased = build_complex(*grid.space, grid.graph, ComplexMetricMode::space_derived);

    // exhaustive vertex constant on this small graph
    double L = 1.0;
    for (int v = 0; v < grid.graph.vertex_count(); ++v) {
        auto hops = bfs_hops(grid.graph, v);
        for (int w = 0; w < grid.graph.vertex_count(); ++w) {
            if (w == v || hops[static_cast<std::size_t>(w)] == kUnreachable) continue;
            double dv = static_cast<double>(hops[static_cast<std::size_t>(w)]) * grid.graph.epsilon;
            double dx = grid.space->distance(
                grid.graph.net.member_indices[static_cast<std::size_t>(v)],
                grid.graph.net.member_indices[static_cast<std::size_t>(w)]);
            L = std::max({L, dv / dx, dx / dv});
        }
    }
    auto rep = check_mode_bilipschitz(tilde, rebased, L, 1000, 9);
    CHECK(rep.ok);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio <= L * (1.0 + 1e-9));
}
