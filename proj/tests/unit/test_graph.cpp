#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <mmg/graph.hpp>
#include <mmg/lattice_count.hpp>

#include "../support/test_support.hpp"

using namespace mmg;

TEST_CASE("interior degree 28 on the quarter grid") {
    auto built = mmgtest::dyadic_grid(3, 12);  // eps = 1/4
    const auto& g = built.graph;
    int interior = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.interior(v)) {
            ++interior;
            CHECK(g.degree(v) == 28);
        }
    }
    CHECK(interior > 0);
}

TEST_CASE("one-dimensional lattice has interior degree 6") {
    auto space = SampledSpace::make_euclidean_lattice(1, Rational(1, 1), 10);
    auto net = build_maximal_net(space, 1.0, 1);
    auto g = build_graph(space, net);
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.interior(v)) CHECK(g.degree(v) == 6);
    }
    CHECK(g.degree(10) == 6);  // the origin
}

TEST_CASE("points beyond 3*eps are not adjacent") {
    auto built = mmgtest::graph_from_adjacency({}, 2, 1.0);  // two points at 5*eps
    CHECK(built.graph.edge_count() == 0);
    CHECK(graph_distance(built.graph, 0, 1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("adjacency is symmetric, loop-free, and respects the edge rule") {
    auto built = mmgtest::dyadic_grid(2, 8);
    const auto& g = built.graph;
    const auto& space = *built.space;
    for (int v = 0; v < g.vertex_count(); ++v) {
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
            CHECK(v != w);
            const auto& adj_w = g.adjacency[static_cast<std::size_t>(w)];
            CHECK(std::find(adj_w.begin(), adj_w.end(), v) != adj_w.end());
            auto steps = space.lattice_sq_steps(g.net.member_indices[static_cast<std::size_t>(v)],
                                                g.net.member_indices[static_cast<std::size_t>(w)]);
            REQUIRE(steps.has_value());
            CHECK(*steps >= 1);
            CHECK(*steps <= 9);
        }
    }
}

TEST_CASE("graph distance: identity, neighbors, BFS oracle") {
    auto built = mmgtest::dyadic_grid(3, 16);  // eps = 1/4 on [-4,4]^2
    const auto& g = built.graph;
    int origin = -1, unit_up = -1, diag = -1;
    for (int v = 0; v < g.vertex_count(); ++v) {
        auto p = g.vertex_point(v);
        if (p[0] == 0.0 && p[1] == 0.0) origin = v;
        if (p[0] == 0.0 && p[1] == 1.0) unit_up = v;
        if (p[0] == 1.0 && p[1] == 1.0) diag = v;
    }
    REQUIRE(origin >= 0);
    REQUIRE(unit_up >= 0);
    REQUIRE(diag >= 0);

    CHECK(graph_distance(g, origin, origin) == 0.0);
    int nbr = g.adjacency[static_cast<std::size_t>(origin)].front();
    CHECK(graph_distance(g, origin, nbr) == g.epsilon);

    // axis pair (0,0)-(0,1): 4 lattice steps, 3 per hop -> ceil(4/3) = 2 hops
    CHECK(hop_distance(g, origin, unit_up) == 2);
    CHECK(graph_distance(g, origin, unit_up) == doctest::Approx(0.5));
    // diagonal pair (0,0)-(1,1): (2,2) moves -> 2 hops of eps
    CHECK(hop_distance(g, origin, diag) == 2);
    CHECK(graph_distance(g, origin, diag) == doctest::Approx(0.5));
}

TEST_CASE("graph balls") {
    auto built = mmgtest::dyadic_grid(4, 16);  // eps = 1/8
    const auto& g = built.graph;
    int origin = -1;
    for (int v = 0; v < g.vertex_count(); ++v) {
        auto p = g.vertex_point(v);
        if (p[0] == 0.0 && p[1] == 0.0) origin = v;
    }
    REQUIRE(origin >= 0);
    const double eps = g.epsilon;

    auto tiny = graph_ball(g, {origin, eps / 2.0});
    CHECK(tiny == std::vector<int>{origin});
    auto at_eps = graph_ball(g, {origin, eps});
    CHECK(at_eps == std::vector<int>{origin});

    auto one_hop = graph_ball(g, {origin, 1.5 * eps});
    CHECK(one_hop.size() == 29);  // center plus its 28 neighbors

    // ball radii grow monotonically and match the BFS level sets
    auto hops = bfs_hops(g, origin);
    for (int k = 1; k <= 3; ++k) {
        auto ball = graph_ball(g, {origin, (k + 0.5) * eps});
        std::size_t expect = 0;
        for (std::int32_t h : hops) {
            if (h != kUnreachable && h <= k) ++expect;
        }
        CHECK(ball.size() == expect);
    }
}

TEST_CASE("ball masses reproduce the dyadic grid values") {
    const double pi = std::numbers::pi;
    {
        auto built = mmgtest::dyadic_grid(4, 12);  // eps = 1/8, covers the unit ball
        const auto& g = built.graph;
        int origin = -1;
        for (int v = 0; v < g.vertex_count(); ++v) {
            auto p = g.vertex_point(v);
            if (p[0] == 0.0 && p[1] == 0.0) origin = v;
        }
        auto ball = euclidean_ball_vertices(*built.space, g, origin, 1.0);
        CHECK(ball.size() == 193);
        CHECK(ball_mass(g, ball) == doctest::Approx(193.0 * pi / 64.0).epsilon(1e-12));
        CHECK(g.masses[0] == doctest::Approx(pi * g.epsilon * g.epsilon).epsilon(1e-15));
    }
    {
        auto built = mmgtest::dyadic_grid(5, 20);  // eps = 1/16
        const auto& g = built.graph;
        int origin = -1;
        for (int v = 0; v < g.vertex_count(); ++v) {
            auto p = g.vertex_point(v);
            if (p[0] == 0.0 && p[1] == 0.0) origin = v;
        }
        auto ball = euclidean_ball_vertices(*built.space, g, origin, 1.0);
        CHECK(ball.size() == 793);
        CHECK(ball_mass(g, ball) == doctest::Approx(793.0 * pi / 256.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ball_mass(mmgtest::dyadic_grid(2, 4).graph, std::vector<int>{}),
                    std::invalid_argument);
}

TEST_CASE("embedding upper bound d_X <= 3 d_V along BFS trees") {
    auto built = mmgtest::dyadic_grid(3, 10);
    const auto& g = built.graph;
    const auto& space = *built.space;
    auto hops = bfs_hops(g, 0);
    for (int v = 0; v < g.vertex_count(); ++v) {
        std::int32_t h = hops[static_cast<std::size_t>(v)];
        if (h == kUnreachable || v == 0) continue;
        double dv = static_cast<double>(h) * g.epsilon;
        DistCmp c = space.compare_distance(g.net.member_indices[0],
                                           g.net.member_indices[static_cast<std::size_t>(v)],
                                           3.0 * dv);
        CHECK(c.sign <= 0);
    }
}

TEST_CASE("three-dimensional lattice degree matches the displacement oracle") {
    auto space = SampledSpace::make_euclidean_lattice(3, Rational(1, 2), 6);
    auto net = build_maximal_net(space, 0.5, 1);
    auto g = build_graph(space, net);
    // oracle: integer displacement vectors with 1 <= |d|^2 <= 9
    int expect = 0;
    for (int i = -3; i <= 3; ++i) {
        for (int j = -3; j <= 3; ++j) {
            for (int k = -3; k <= 3; ++k) {
                int s = i * i + j * j + k * k;
                if (s >= 1 && s <= 9) ++expect;
            }
        }
    }
    int interior = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.interior(v)) {
            ++interior;
            CHECK(g.degree(v) == expect);
        }
    }
    CHECK(interior > 0);
    // analytic masses in dimension 3: (4/3) pi eps^3
    CHECK(g.masses[0] ==
          doctest::Approx(4.0 / 3.0 * std::numbers::pi * 0.125).epsilon(1e-14));
}

TEST_CASE("empirical masses agree between the indexed and direct evaluators") {
    SplitMix64 rng(55);
    std::vector<std::vector<double>> pts;
    std::vector<double> weights;
    for (int i = 0; i < 300; ++i) {
        pts.push_back({5.0 * rng.symmetric(), 5.0 * rng.symmetric()});
        weights.push_back(0.5 + rng.unit());
    }
    auto space = SampledSpace::from_points(std::move(pts), MeasureKind::empirical_weighted,
                                           std::move(weights));
    auto net = build_maximal_net(space, 0.8, 9);
    auto g = build_graph(space, net);
    for (int v = 0; v < g.vertex_count(); ++v) {
        double direct = space.ball_measure(
            {g.net.member_indices[static_cast<std::size_t>(v)], g.epsilon});
        CHECK(g.masses[static_cast<std::size_t>(v)] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("sierpinski sample runs through the whole pipeline") {
    auto space = SampledSpace::sierpinski_prefractal(3);
    auto net = build_maximal_net(space, 0.25, 3);
    auto g = build_graph(space, net);
    CHECK(g.vertex_count() > 0);
    for (double m : g.masses) CHECK(m > 0.0);
    // connected at this scale: gasket vertices are quasi-dense along sides
    auto hops = bfs_hops(g, 0);
    int reachable = 0;
    for (auto h : hops) {
        if (h != kUnreachable) ++reachable;
    }
    CHECK(reachable == g.vertex_count());
    auto one_d = SampledSpace::make_euclidean_lattice(1, Rational(1, 1), 5);
    CHECK(one_d.ball_measure({0, 1.5}) == 3.0);  // 2r in dimension 1
}

TEST_CASE("graph export json shape") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}, {1, 2}}, 3, 1.0);
    auto j = graph_to_json(built.graph);
    CHECK(j["epsilon"] == 1.0);
    CHECK(j["vertices"].size() == 3);
    CHECK(j["edges"].size() == 2);
    CHECK(j["vertices"][0].contains("mass"));
    CHECK(j["vertices"][0].contains("degree"));
}
