#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <mmg/graph.hpp>
#include <mmg/util.hpp>

namespace mmg {

struct SamplePlan {
    int centers = 64;
    int radii = 12;
    int sources = 32;
    int pairs = 2048;
};

struct DoublingReport {
    std::string target;  // "space" | "graph" | "complex"
    int sampled_centers = 0;
    std::vector<double> radii;
    double max_ratio = 1.0;
    std::optional<double> theoretical_bound;
    int witness_center = -1;
    double witness_radius = 0.0;
    bool boundary_affected_included = false;
    std::vector<std::array<double, 3>> table;  // (center, radius, ratio)
};

struct ComparabilityReport {
    double K_lower = 1.0;  // min of m(B_V)/mu(B_X)
    double K_upper = 1.0;  // max of m(B_V)/mu(B_X)
    double K = 1.0;        // max(K_upper, 1/K_lower)
    std::vector<double> radii_tested;
    double scale_floor = 0.0;  // = epsilon
    int witness_low = -1, witness_high = -1;
    std::vector<std::array<double, 3>> table;
};

struct DistortionReport {
    double L_estimate = 1.0;
    double max_dv_over_dx = 0.0;
    std::pair<int, int> max_ratio_pair{-1, -1};
    double max_dx_over_dv = 0.0;
    std::pair<int, int> min_ratio_pair{-1, -1};
    double connected_fraction = 1.0;
    long pairs_sampled = 0;
    long upper_bound_violations = 0;  // d_X > 3*d_V beyond comparison policy
    std::optional<double> declared_L;
    bool declared_consistent = true;
};

struct TheoreticalBounds {
    double degree_bound = 1.0;  // C_mu^4
    int alpha = 0;              // ceil(log2(L+1))
    double C_m_bound = 1.0;     // C_mu^(8+2*alpha)
};

// Degree and graph-doubling bounds implied by the space constants:
// N <= C_mu^4 and C_m = C_mu^(8+2a) with a = ceil(log2(L+1)).
inline TheoreticalBounds theoretical_bounds(double C_mu, double L) {
    if (!(C_mu >= 1.0) || !(L >= 1.0)) {
        throw std::invalid_argument("theoretical_bounds needs C_mu >= 1 and L >= 1");
    }
    TheoreticalBounds b;
    b.degree_bound = std::pow(C_mu, 4.0);
    double a = std::log2(L + 1.0);
    double ar = std::round(a);
    b.alpha = std::abs(a - ar) < 1e-12 ? static_cast<int>(ar)
                                       : static_cast<int>(std::ceil(a));
    b.C_m_bound = std::pow(C_mu, 8.0 + 2.0 * b.alpha);
    return b;
}

inline DoublingReport estimate_doubling_space(const SampledSpace& space,
                                              const std::vector<double>& radii, int n_centers,
                                              std::uint64_t seed) {
    if (space.size() == 0) throw std::invalid_argument("empty space");
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
    }
    DoublingReport rep;
    rep.target = "space";
    rep.radii = radii;

    std::vector<int> centers(static_cast<std::size_t>(space.size()));
    for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = static_cast<int>(i);
    seeded_shuffle(centers, derive_seed(seed, "doubling-space-centers"));
    if (static_cast<int>(centers.size()) > n_centers) {
        centers.resize(static_cast<std::size_t>(n_centers));
    }
    rep.sampled_centers = static_cast<int>(centers.size());

    for (int c : centers) {
        for (double r : radii) {
            double small = space.ball_measure({c, r});
            double big = space.ball_measure({c, 2.0 * r});
            if (!(small > 0.0) || !(big > 0.0)) {
                throw std::runtime_error("ball of zero mass in doubling estimate");
            }
            double ratio = big / small;
            rep.table.push_back({static_cast<double>(c), r, ratio});
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.witness_center = c;
                rep.witness_radius = r;
            }
        }
    }
    return rep;
}

namespace detail {

// Centers for radius-dependent interior sampling: vertices whose balls of
// reach `required_margin` stay inside the sample extent.  Falls back to the
// most-interior vertices when none qualify.
inline std::vector<int> interior_centers(const NetGraph& g, double required_margin,
                                         int n_centers, std::uint64_t seed, bool* fallback) {
    std::vector<int> eligible;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.margins[static_cast<std::size_t>(v)] >= required_margin) eligible.push_back(v);
    }
    *fallback = eligible.empty();
    if (eligible.empty()) {
        eligible.resize(static_cast<std::size_t>(g.vertex_count()));
        for (int v = 0; v < g.vertex_count(); ++v) eligible[static_cast<std::size_t>(v)] = v;
        std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
            return g.margins[static_cast<std::size_t>(a)] > g.margins[static_cast<std::size_t>(b)];
        });
        if (static_cast<int>(eligible.size()) > n_centers) {
            eligible.resize(static_cast<std::size_t>(n_centers));
        }
        return eligible;
    }
    seeded_shuffle(eligible, seed);
    if (static_cast<int>(eligible.size()) > n_centers) {
        eligible.resize(static_cast<std::size_t>(n_centers));
    }
    return eligible;
}

// Mass of B_V(center, r) and B_V(center, 2r) from one bounded BFS.
inline std::pair<double, double> nested_ball_masses(const NetGraph& g, int center, double r) {
    std::int32_t lim1 = hop_limit_for_radius(r, g.epsilon);
    std::int32_t lim2 = hop_limit_for_radius(2.0 * r, g.epsilon);
    auto hops = bfs_hops(g, center, lim2);
    double m1 = 0.0, m2 = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        std::int32_t h = hops[static_cast<std::size_t>(v)];
        if (h == kUnreachable) continue;
        double m = g.masses[static_cast<std::size_t>(v)];
        if (h <= lim2) m2 += m;
        if (h <= lim1) m1 += m;
    }
    return {m1, m2};
}

// Approximate graph diameter (hops) by double-sweep BFS from vertex 0's
// component.
inline std::int32_t diameter_hops(const NetGraph& g) {
    if (g.vertex_count() == 0) return 0;
    auto h0 = bfs_hops(g, 0);
    int far = 0;
    std::int32_t best = 0;
    for (int v = 0; v < g.vertex_count(); ++v) {
        std::int32_t h = h0[static_cast<std::size_t>(v)];
        if (h != kUnreachable && h > best) {
            best = h;
            far = v;
        }
    }
    auto h1 = bfs_hops(g, far);
    std::int32_t diam = 0;
    for (std::int32_t h : h1) {
        if (h != kUnreachable) diam = std::max(diam, h);
    }
    return diam;
}

}  // namespace detail

inline std::vector<double> default_graph_radii(const NetGraph& g, int n_radii) {
    std::int32_t diam = detail::diameter_hops(g);
    double hi = std::max(g.epsilon, 0.5 * static_cast<double>(diam) * g.epsilon);
    return log_spaced(g.epsilon, hi, n_radii);
}

inline DoublingReport estimate_doubling_graph(const NetGraph& g, const std::vector<double>& radii,
                                              int n_centers, std::uint64_t seed) {
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
    }
    DoublingReport rep;
    rep.target = "graph";
    rep.radii = radii;
    int sampled = 0;
    for (double r : radii) {
        bool fallback = false;
        auto centers = detail::interior_centers(g, 6.0 * r + g.epsilon, n_centers,
                                                derive_seed(seed, "doubling-graph-centers"),
                                                &fallback);
        rep.boundary_affected_included = rep.boundary_affected_included || fallback;
        sampled = std::max(sampled, static_cast<int>(centers.size()));
        for (int c : centers) {
            auto [m1, m2] = detail::nested_ball_masses(g, c, r);
            if (!(m1 > 0.0) || !(m2 > 0.0)) {
                throw std::runtime_error("ball of zero mass in doubling estimate");
            }
            double ratio = m2 / m1;
            rep.table.push_back({static_cast<double>(c), r, ratio});
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.witness_center = c;
                rep.witness_radius = r;
            }
        }
    }
    rep.sampled_centers = sampled;
    return rep;
}

// Measure comparability: extreme ratios of m(B_V(x, r)) to mu(B_X(x, r))
// over a sampled plan.  Radii below epsilon are rejected: comparability is only
// claimed at scales >= epsilon.
inline ComparabilityReport comparability(const SampledSpace& space, const NetGraph& g,
                                         const std::vector<double>& radii, int n_centers,
                                         std::uint64_t seed) {
    ComparabilityReport rep;
    rep.scale_floor = g.epsilon;
    rep.radii_tested = radii;
    rep.K_lower = std::numeric_limits<double>::infinity();
    rep.K_upper = 0.0;
    for (double r : radii) {
        if (r < g.epsilon * (1.0 - 1e-12)) {
            throw std::invalid_argument("comparability radius below epsilon");
        }
    }
    for (double r : radii) {
        bool fallback = false;
        auto centers = detail::interior_centers(g, 3.0 * r + g.epsilon, n_centers,
                                                derive_seed(seed, "comparability-centers"),
                                                &fallback);
        for (int c : centers) {
            auto ball = graph_ball(g, {c, r});
            double mv = ball_mass(g, ball);
            double mx = space.ball_measure({g.net.member_indices[static_cast<std::size_t>(c)], r});
            double ratio = mv / mx;
            rep.table.push_back({static_cast<double>(c), r, ratio});
            if (ratio < rep.K_lower) {
                rep.K_lower = ratio;
                rep.witness_low = c;
            }
            if (ratio > rep.K_upper) {
                rep.K_upper = ratio;
                rep.witness_high = c;
            }
        }
    }
    if (rep.table.empty()) throw std::invalid_argument("comparability needs radii and centers");
    rep.K = std::max(rep.K_upper, 1.0 / rep.K_lower);
    rep.K = std::max(rep.K, 1.0);
    return rep;
}

// Embedding distortion over sampled pairs: d_X <= 3 d_V always; the left
// bi-Lipschitz inequality inverted gives L_estimate = max(d_V/d_X) - 1, clipped at 1.
inline DistortionReport distortion(const SampledSpace& space, const NetGraph& g,
                                   const SamplePlan& plan, std::uint64_t seed) {
    if (g.vertex_count() < 2) throw std::invalid_argument("distortion needs >= 2 vertices");
    DistortionReport rep;
    rep.declared_L = space.quasiconvexity_L();

    std::vector<int> sources(static_cast<std::size_t>(g.vertex_count()));
    for (std::size_t i = 0; i < sources.size(); ++i) sources[i] = static_cast<int>(i);
    seeded_shuffle(sources, derive_seed(seed, "distortion-sources"));
    if (static_cast<int>(sources.size()) > plan.sources) {
        sources.resize(static_cast<std::size_t>(plan.sources));
    }
    const int per_source = std::max(1, plan.pairs / std::max<int>(1, static_cast<int>(sources.size())));

    long connected = 0;
    for (int s : sources) {
        auto hops = bfs_hops(g, s);
        std::vector<int> targets(static_cast<std::size_t>(g.vertex_count()));
        for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = static_cast<int>(i);
        seeded_shuffle(targets, derive_seed(seed ^ static_cast<std::uint64_t>(s), "distortion-targets"));
        int taken = 0;
        for (int t : targets) {
            if (t == s) continue;
            if (taken >= per_source) break;
            ++taken;
            ++rep.pairs_sampled;
            std::int32_t h = hops[static_cast<std::size_t>(t)];
            if (h == kUnreachable) continue;
            ++connected;
            const int ps = g.net.member_indices[static_cast<std::size_t>(s)];
            const int pt = g.net.member_indices[static_cast<std::size_t>(t)];
            double dx = space.distance(ps, pt);
            double dv = static_cast<double>(h) * g.epsilon;
            double r1 = dv / dx;
            double r2 = dx / dv;
            if (r1 > rep.max_dv_over_dx) {
                rep.max_dv_over_dx = r1;
                rep.max_ratio_pair = {s, t};
            }
            if (r2 > rep.max_dx_over_dv) {
                rep.max_dx_over_dv = r2;
                rep.min_ratio_pair = {s, t};
            }
            DistCmp c = space.compare_distance(ps, pt, 3.0 * dv);
            if (c.sign > 0) ++rep.upper_bound_violations;
        }
    }
    rep.connected_fraction =
        rep.pairs_sampled > 0 ? static_cast<double>(connected) / static_cast<double>(rep.pairs_sampled)
                              : 1.0;
    rep.L_estimate = std::max(1.0, rep.max_dv_over_dx - 1.0);
    if (rep.declared_L) {
        rep.declared_consistent = rep.max_dv_over_dx <= (*rep.declared_L + 1.0) * (1.0 + 1e-9);
    }
    return rep;
}

// The measured two-sided vertex constant used by one-complex checks:
// max(d_V/d_X, d_X/d_V) over sampled connected pairs.
inline double vertex_bilipschitz_constant(const DistortionReport& rep) {
    return std::max({1.0, rep.max_dv_over_dx, rep.max_dx_over_dv});
}

inline nlohmann::ordered_json to_json(const DoublingReport& r, bool emit_table = false) {
    nlohmann::ordered_json j;
    j["target"] = r.target;
    j["sampled_centers"] = r.sampled_centers;
    j["radii"] = r.radii;
    j["max_ratio"] = r.max_ratio;
    if (r.theoretical_bound) j["theoretical_bound"] = *r.theoretical_bound;
    j["witness"] = {{"center", r.witness_center}, {"radius", r.witness_radius}};
    j["boundary_affected_included"] = r.boundary_affected_included;
    if (emit_table) j["table"] = r.table;
    return j;
}

inline nlohmann::ordered_json to_json(const ComparabilityReport& r, bool emit_table = false) {
    nlohmann::ordered_json j;
    j["K_lower"] = r.K_lower;
    j["K_upper"] = r.K_upper;
    j["K"] = r.K;
    j["radii_tested"] = r.radii_tested;
    j["scale_floor"] = r.scale_floor;
    j["witness_low"] = r.witness_low;
    j["witness_high"] = r.witness_high;
    if (emit_table) j["table"] = r.table;
    return j;
}

inline nlohmann::ordered_json to_json(const DistortionReport& r) {
    nlohmann::ordered_json j;
    j["L_estimate"] = r.L_estimate;
    j["max_dv_over_dx"] = r.max_dv_over_dx;
    j["max_ratio_pair"] = {r.max_ratio_pair.first, r.max_ratio_pair.second};
    j["max_dx_over_dv"] = r.max_dx_over_dv;
    j["min_ratio_pair"] = {r.min_ratio_pair.first, r.min_ratio_pair.second};
    j["connected_fraction"] = r.connected_fraction;
    j["pairs_sampled"] = r.pairs_sampled;
    j["upper_bound_violations"] = r.upper_bound_violations;
    if (r.declared_L) {
        j["declared_L"] = *r.declared_L;
        j["declared_consistent"] = r.declared_consistent;
    }
    return j;
}

}  // namespace mmg
