#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <mmg/analysis.hpp>
#include <mmg/graph.hpp>
#include <mmg/net.hpp>
#include <mmg/poincare.hpp>

namespace mmg {

struct MultiscaleChain {
    std::vector<EpsNet> nets;
    std::vector<NetGraph> graphs;
};

// Nested dyadic chain: a maximal net at epsilon0, then halving refinements.
inline MultiscaleChain build_multiscale_chain(const SampledSpace& space, int levels,
                                              double epsilon0, std::uint64_t seed) {
    if (levels < 2) throw std::invalid_argument("multiscale needs at least 2 levels");
    if (!(epsilon0 > 0.0)) throw std::invalid_argument("epsilon0 must be positive");
    MultiscaleChain chain;
    chain.nets.push_back(build_maximal_net(space, epsilon0, seed));
    for (int i = 1; i < levels; ++i) {
        chain.nets.push_back(refine_nested(space, chain.nets.back(),
                                           derive_seed(seed, "level-" + std::to_string(i))));
    }
    for (const auto& net : chain.nets) chain.graphs.push_back(build_graph(space, net));
    return chain;
}

struct LevelRecord {
    int level = 0;
    double epsilon = 0.0;
    int vertices = 0;
    std::size_t edges = 0;
    double H = 0.0;         // Hausdorff gap of the net over the sample
    double L = 1.0;         // measured two-sided vertex distortion
    long upper_violations = 0;
    double K = 1.0;         // measure comparability constant
    double doubling = 1.0;  // sampled doubling ratio of m
    double pi_C = 0.0;      // suite lower bound for the PI constant
};

inline LevelRecord analyze_level(const SampledSpace& space, const EpsNet& net,
                                 const NetGraph& g, int level, double p, double lambda,
                                 const SamplePlan& plan, std::uint64_t seed) {
    LevelRecord rec;
    rec.level = level;
    rec.epsilon = g.epsilon;
    rec.vertices = g.vertex_count();
    rec.edges = g.edge_count();
    rec.H = hausdorff_gap(space, net);

    auto dist = distortion(space, g, plan, derive_seed(seed, "ms-distortion"));
    rec.L = vertex_bilipschitz_constant(dist);
    rec.upper_violations = dist.upper_bound_violations;

    const double eps = g.epsilon;
    auto comp = comparability(space, g, {2.0 * eps, 4.0 * eps, 8.0 * eps},
                              std::max(8, plan.centers / 2), derive_seed(seed, "ms-compare"));
    rec.K = comp.K;

    auto dbl = estimate_doubling_graph(g, {eps, 2.0 * eps, 4.0 * eps, 8.0 * eps},
                                       std::max(8, plan.centers / 2),
                                       derive_seed(seed, "ms-doubling"));
    rec.doubling = dbl.max_ratio;

    // PI ball at the most interior vertex, fixed relative radius
    int center = 0;
    for (int v = 1; v < g.vertex_count(); ++v) {
        if (g.margins[static_cast<std::size_t>(v)] > g.margins[static_cast<std::size_t>(center)]) {
            center = v;
        }
    }
    SuitePlan suite;
    suite.ascent_steps = 80;
    auto est = estimate_constant_lower(g, {center, 4.0 * eps}, lambda, p, suite,
                                       derive_seed(seed, "ms-pi"));
    rec.pi_C = est.C_lower;
    return rec;
}

struct UniformVerdict {
    bool pass = false;
    double max_constant = 0.0;
    double min_constant = 0.0;
    double spread = 1.0;  // max / min
    int witness_level = -1;
    std::string note;
};

struct MultiscaleReport {
    std::vector<LevelRecord> levels;
    double uniformity_factor = 10.0;
    UniformVerdict hausdorff_to_zero;   // condition (1)
    UniformVerdict uniform_L;           // condition (2)
    UniformVerdict uniform_K;           // condition (3)
    UniformVerdict uniform_doubling;    // condition (4)
    UniformVerdict uniform_pi;          // condition (5)
    bool all_pass = false;
    std::string certified_range;
};

namespace detail {

inline UniformVerdict spread_verdict(const std::vector<double>& vals, double factor,
                                     const char* what) {
    UniformVerdict v;
    v.max_constant = -std::numeric_limits<double>::infinity();
    v.min_constant = std::numeric_limits<double>::infinity();
    int arg_max = -1;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!std::isfinite(vals[i]) || vals[i] <= 0.0) {
            v.pass = false;
            v.witness_level = static_cast<int>(i) + 1;
            v.note = std::string(what) + " non-finite or nonpositive";
            return v;
        }
        if (vals[i] > v.max_constant) {
            v.max_constant = vals[i];
            arg_max = static_cast<int>(i) + 1;
        }
        v.min_constant = std::min(v.min_constant, vals[i]);
    }
    v.spread = v.max_constant / v.min_constant;
    v.pass = v.spread <= factor;
    if (!v.pass) {
        v.witness_level = arg_max;
        v.note = std::string(what) + " spread exceeds the uniformity factor";
    }
    return v;
}

}  // namespace detail

// A single constant per condition must cover every level: operationalized as
// bounded spread (max/min <= factor) of the per-level constants, which is
// what a finite run can certify and what catches per-level anomalies.
inline MultiscaleReport assemble_multiscale(std::vector<LevelRecord> levels,
                                            double uniformity_factor = 10.0) {
    if (levels.size() < 2) throw std::invalid_argument("multiscale needs at least 2 levels");
    MultiscaleReport rep;
    rep.levels = std::move(levels);
    rep.uniformity_factor = uniformity_factor;

    // (1): H_i finite, below epsilon_i (maximality), and nonincreasing under
    // the nested dyadic scheme
    {
        UniformVerdict v;
        v.pass = true;
        v.max_constant = 0.0;
        v.min_constant = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rep.levels.size(); ++i) {
            const auto& rec = rep.levels[i];
            v.max_constant = std::max(v.max_constant, rec.H);
            v.min_constant = std::min(v.min_constant, rec.H);
            if (!std::isfinite(rec.H) || !(rec.H < rec.epsilon)) {
                v.pass = false;
                v.witness_level = rec.level;
                v.note = "gap not below epsilon";
                break;
            }
            if (i > 0 && rec.H > rep.levels[i - 1].H) {
                v.pass = false;
                v.witness_level = rec.level;
                v.note = "gap increased between levels";
                break;
            }
        }
        rep.hausdorff_to_zero = v;
    }

    std::vector<double> Ls, Ks, Ds, Cs;
    for (const auto& rec : rep.levels) {
        Ls.push_back(rec.L);
        Ks.push_back(rec.K);
        Ds.push_back(rec.doubling);
        Cs.push_back(rec.pi_C);
    }
    rep.uniform_L = detail::spread_verdict(Ls, uniformity_factor, "L");
    for (const auto& rec : rep.levels) {
        if (rec.upper_violations > 0) {
            rep.uniform_L.pass = false;
            rep.uniform_L.witness_level = rec.level;
            rep.uniform_L.note = "embedding upper bound violated";
        }
    }
    rep.uniform_K = detail::spread_verdict(Ks, uniformity_factor, "K");
    rep.uniform_doubling = detail::spread_verdict(Ds, uniformity_factor, "doubling");
    rep.uniform_pi = detail::spread_verdict(Cs, uniformity_factor, "PI constant");

    rep.all_pass = rep.hausdorff_to_zero.pass && rep.uniform_L.pass && rep.uniform_K.pass &&
                   rep.uniform_doubling.pass && rep.uniform_pi.pass;
    std::ostringstream os;
    os << "levels 1.." << rep.levels.size()
       << " certified only; constants beyond this range are not extrapolated";
    rep.certified_range = os.str();
    return rep;
}

inline MultiscaleReport multiscale_report(const SampledSpace& space, int levels, double epsilon0,
                                          double p, double lambda, const SamplePlan& plan,
                                          std::uint64_t seed, double uniformity_factor = 10.0) {
    auto chain = build_multiscale_chain(space, levels, epsilon0, seed);
    std::vector<LevelRecord> records;
    for (int i = 0; i < levels; ++i) {
        records.push_back(analyze_level(space, chain.nets[static_cast<std::size_t>(i)],
                                        chain.graphs[static_cast<std::size_t>(i)], i + 1, p,
                                        lambda, plan, derive_seed(seed, std::to_string(i))));
    }
    return assemble_multiscale(std::move(records), uniformity_factor);
}

inline nlohmann::ordered_json to_json(const UniformVerdict& v) {
    nlohmann::ordered_json j;
    j["pass"] = v.pass;
    j["max_constant"] = v.max_constant;
    j["min_constant"] = v.min_constant;
    j["spread"] = v.spread;
    j["witness_level"] = v.witness_level;
    j["note"] = v.note;
    return j;
}

inline nlohmann::ordered_json to_json(const MultiscaleReport& r) {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rec : r.levels) {
        nlohmann::ordered_json lj;
        lj["level"] = rec.level;
        lj["epsilon"] = rec.epsilon;
        lj["vertices"] = rec.vertices;
        lj["edges"] = rec.edges;
        lj["H"] = rec.H;
        lj["L"] = rec.L;
        lj["K"] = rec.K;
        lj["doubling"] = rec.doubling;
        lj["pi_C"] = rec.pi_C;
        lj["upper_violations"] = rec.upper_violations;
        arr.push_back(std::move(lj));
    }
    j["levels"] = std::move(arr);
    j["uniformity_factor"] = r.uniformity_factor;
    j["verdicts"] = {{"hausdorff_to_zero", to_json(r.hausdorff_to_zero)},
                     {"uniform_L", to_json(r.uniform_L)},
                     {"uniform_K", to_json(r.uniform_K)},
                     {"uniform_doubling", to_json(r.uniform_doubling)},
                     {"uniform_pi", to_json(r.uniform_pi)}};
    j["all_pass"] = r.all_pass;
    j["certified_range"] = r.certified_range;
    return j;
}

}  // namespace mmg
