#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include <mmg/ghcheck.hpp>
#include <mmg/multiscale.hpp>

#include "../support/test_support.hpp"

using namespace mmg;

namespace {

// chain over a fine dyadic sample with epsilon halving from 1
struct Chain {
    std::shared_ptr<SampledSpace> space;
    MultiscaleChain chain;
    std::vector<OneComplex> complexes;
    int q_space_index = -1;

    Chain(int levels, long extent_steps, int finest_level, std::uint64_t seed) {
        long long den = 1LL << (finest_level - 1);
        space = std::make_shared<SampledSpace>(
            SampledSpace::make_euclidean_lattice(2, Rational(1, den), extent_steps));
        chain = build_multiscale_chain(*space, levels, 1.0, seed);
        for (const auto& g : chain.graphs) {
            complexes.push_back(build_complex(*space, g, ComplexMetricMode::space_derived));
        }
        // base point: the level-1 member nearest the origin
        double best = std::numeric_limits<double>::infinity();
        for (int m : chain.nets.front().member_indices) {
            auto p = space->point(m);
            double d = std::hypot(p[0], p[1]);
            if (d < best) {
                best = d;
                q_space_index = m;
            }
        }
    }
};

}  // namespace

TEST_CASE("nearest vertex map") {
    auto built = mmgtest::graph_from_adjacency({{0, 1}}, 2, 1.0);
    auto c = build_complex(*built.space, built.graph, ComplexMetricMode::graph_derived);
    const double eps = c.epsilon();

    CHECK(nearest_vertex_map(c, c.vertex_point(1)) == 1);
    CHECK(nearest_vertex_map(c, c.edge_point(0, 0.2 * eps)) == 0);
    CHECK(nearest_vertex_map(c, c.edge_point(0, 0.8 * eps)) == 1);
    // exact midpoint resolves to the lower-index endpoint
    CHECK(nearest_vertex_map(c, c.edge_point(0, 0.5 * eps)) == 0);
}

TEST_CASE("gh conditions on a dyadic chain") {
    Chain chain(4, 48, 4, 5);  // levels eps = 1, 1/2, 1/4, 1/8 over [-6,6]^2
    auto rep = gh_condition_check(*chain.space, chain.complexes, chain.q_space_index, 4.0, 0.5,
                                  200, 7);
    CHECK(rep.levels.size() == 4);
    for (const auto& rec : rep.levels) {
        CHECK(rec.condition1_pass);
        // vertex pairs are exact in the rebased metric
        CHECK(rec.max_vertex_pair_defect == 0.0);
    }
    // every level with eps_i < eta / (2 L) must pass; L <= 3 on these graphs
    for (const auto& rec : rep.levels) {
        if (rec.epsilon < 0.5 / (2.0 * 3.0)) {
            CHECK(rec.all_pass);
        }
        // the sampled defect obeys the 2 L eps bound at passing levels
        if (rec.all_pass) {
            CHECK(rec.max_metric_defect <= 2.0 * 3.0 * rec.epsilon * (1.0 + 1e-12));
        }
    }
    // ball masses over the radius grid are recorded per level
    for (const auto& rec : rep.levels) {
        CHECK(rec.ball_masses.size() == rep.mass_radius_grid.size());
        for (double m : rec.ball_masses) CHECK(m > 0.0);
    }
}

TEST_CASE("i0 is monotone in eta") {
    Chain chain(5, 48, 5, 5);
    auto strict = gh_condition_check(*chain.space, chain.complexes, chain.q_space_index, 4.0,
                                     0.25, 150, 7);
    auto loose = gh_condition_check(*chain.space, chain.complexes, chain.q_space_index, 4.0,
                                    1.0, 150, 7);
    if (strict.i0 >= 0 && loose.i0 >= 0) {
        CHECK(strict.i0 >= loose.i0);
    } else if (loose.i0 < 0) {
        CHECK(strict.i0 < 0);  // if the loose check fails everywhere, so must the strict
    }
}

TEST_CASE("gh check validates its arguments") {
    Chain chain(2, 16, 2, 3);
    CHECK_THROWS_AS(gh_condition_check(*chain.space, chain.complexes, chain.q_space_index, 4.0,
                                       4.0, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(gh_condition_check(*chain.space, chain.complexes, chain.q_space_index, 4.0,
                                       5.0, 10, 1),
                    std::invalid_argument);
    // a base point missing from a level is not a nested embedding
    auto detached = build_maximal_net(*chain.space, 1.0, 99);
    // craft a net that certainly misses the base point
    std::vector<int> keep;
    for (int m : detached.member_indices) {
        if (m != chain.q_space_index) keep.push_back(m);
    }
    detached.member_indices = keep;
    auto g = build_graph(*chain.space, detached);
    std::vector<OneComplex> levels{build_complex(*chain.space, g,
                                                 ComplexMetricMode::space_derived)};
    CHECK_THROWS_AS(gh_condition_check(*chain.space, levels, chain.q_space_index, 4.0, 0.5, 10, 1),
                    std::runtime_error);
}

TEST_CASE("multiscale chain: nesting and halving") {
    auto space = SampledSpace::make_euclidean_lattice(2, Rational(1, 4), 24);
    auto chain = build_multiscale_chain(space, 3, 1.0, 11);
    CHECK(chain.nets.size() == 3);
    CHECK(chain.nets[0].epsilon == 1.0);
    CHECK(chain.nets[1].epsilon == 0.5);
    CHECK(chain.nets[2].epsilon == 0.25);
    for (std::size_t i = 1; i < chain.nets.size(); ++i) {
        std::set<int> fine(chain.nets[i].member_indices.begin(),
                           chain.nets[i].member_indices.end());
        for (int m : chain.nets[i - 1].member_indices) CHECK(fine.count(m) == 1);
    }
    CHECK_THROWS_AS(build_multiscale_chain(space, 1, 1.0, 1), std::invalid_argument);
}

TEST_CASE("multiscale verdicts on a clean dyadic run") {
    auto space = SampledSpace::make_euclidean_lattice(2, Rational(1, 8), 64);  // [-8,8]^2
    SamplePlan plan;
    plan.centers = 24;
    plan.sources = 12;
    plan.pairs = 400;
    auto rep = multiscale_report(space, 4, 1.0, 1.0, 2.0, plan, 13);
    CHECK(rep.levels.size() == 4);
    CHECK(rep.hausdorff_to_zero.pass);
    CHECK(rep.uniform_L.pass);
    CHECK(rep.uniform_K.pass);
    CHECK(rep.uniform_doubling.pass);
    CHECK(rep.uniform_pi.pass);
    CHECK(rep.all_pass);
    // report self-consistency: verdicts recomputable from the records
    auto again = assemble_multiscale(rep.levels, rep.uniformity_factor);
    CHECK(again.all_pass == rep.all_pass);
    CHECK(again.uniform_K.max_constant == rep.uniform_K.max_constant);
}

TEST_CASE("corrupted level is caught by the comparability verdict with a witness") {
    auto space = SampledSpace::make_euclidean_lattice(2, Rational(1, 8), 64);
    auto chain = build_multiscale_chain(space, 4, 1.0, 13);
    SamplePlan plan;
    plan.centers = 24;
    plan.sources = 12;
    plan.pairs = 400;
    std::vector<LevelRecord> records;
    for (int i = 0; i < 4; ++i) {
        NetGraph g = chain.graphs[static_cast<std::size_t>(i)];
        if (i == 1) {  // corrupt level 2: masses times 100
            for (double& m : g.masses) m *= 100.0;
        }
        records.push_back(analyze_level(space, chain.nets[static_cast<std::size_t>(i)], g, i + 1,
                                        1.0, 2.0, plan, derive_seed(13, std::to_string(i))));
    }
    auto rep = assemble_multiscale(std::move(records), 10.0);
    CHECK_FALSE(rep.uniform_K.pass);
    CHECK(rep.uniform_K.witness_level == 2);
    // uniform mass scaling leaves doubling ratios and PI ratios unchanged
    CHECK(rep.uniform_doubling.pass);
    CHECK(rep.uniform_pi.pass);
    CHECK(rep.hausdorff_to_zero.pass);
    CHECK_FALSE(rep.all_pass);
}
