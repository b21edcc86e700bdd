#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include <mmg/one_complex.hpp>

namespace mmg {

// f_i: a point on an edge goes to the endpoint within eps/2; exact midpoints
// resolve to the lower-indexed endpoint (edges store a < b with t from a).
inline int nearest_vertex_map(const OneComplex& c, const ComplexPoint& P) {
    if (P.is_vertex()) return P.vertex;
    const auto& e = c.edge(P.edge);
    return P.t <= c.epsilon() / 2.0 ? e.a : e.b;
}

struct GHLevelRecord {
    int level = 0;
    double epsilon = 0.0;
    int q_vertex = -1;
    bool condition1_pass = false;  // f_i(q_i) = q
    double max_metric_defect = 0.0;
    double max_vertex_pair_defect = 0.0;
    bool condition2_pass = false;  // defect < eta on sampled pairs
    double condition3_defect = 0.0;
    bool condition3_pass = false;  // B(q, r-eta) within eta of the image
    bool all_pass = false;
    long pairs_sampled = 0;
    std::vector<double> ball_masses;  // m_bar(B(q, rho)) over the radius grid
};

struct GHCheckReport {
    double r = 0.0;
    double eta = 0.0;
    int i0 = -1;  // first level (1-based) where all conditions hold
    double sample_gap = 0.0;  // covering radius of the sample itself, added to defects
    std::vector<double> mass_radius_grid;
    std::vector<GHLevelRecord> levels;
};

// Executable pointed-GH conditions for a chain of rebased complexes over a
// common sample, with base point q given as a space point index.
inline GHCheckReport gh_condition_check(const SampledSpace& space,
                                        const std::vector<OneComplex>& levels, int q_space_index,
                                        double r, double eta, int pair_samples,
                                        std::uint64_t seed) {
    if (!(eta > 0.0) || !(eta < r)) throw std::invalid_argument("need 0 < eta < r");
    if (q_space_index < 0 || q_space_index >= space.size()) {
        throw std::invalid_argument("base point out of range");
    }
    GHCheckReport rep;
    rep.r = r;
    rep.eta = eta;
    rep.mass_radius_grid = {0.25 * r, 0.5 * r, r};

    // the sample itself stands in for X; for lattice samples its covering
    // radius is the half cell diagonal
    if (space.lattice_scale()) {
        rep.sample_gap = 0.5 * space.lattice_scale()->value() *
                         std::sqrt(static_cast<double>(space.dimension()));
    }

    SplitMix64 rng(derive_seed(seed, "gh-check"));
    int level_no = 0;
    for (const auto& c : levels) {
        ++level_no;
        GHLevelRecord rec;
        rec.level = level_no;
        rec.epsilon = c.epsilon();
        const auto& members = c.base().net.member_indices;
        auto it = std::lower_bound(members.begin(), members.end(), q_space_index);
        if (it == members.end() || *it != q_space_index) {
            throw std::runtime_error("not a nested embedding: base point missing at level " +
                                     std::to_string(level_no));
        }
        rec.q_vertex = static_cast<int>(it - members.begin());
        ComplexPoint q_pt = c.vertex_point(rec.q_vertex);
        rec.condition1_pass = nearest_vertex_map(c, q_pt) == rec.q_vertex;

        auto dist_q = c.vertex_metric_row(rec.q_vertex);
        std::vector<int> ball_vertices;
        for (int v = 0; v < c.base().vertex_count(); ++v) {
            if (dist_q[static_cast<std::size_t>(v)] < r) ball_vertices.push_back(v);
        }

        // ball-mass convergence record: m_i over Euclidean balls at q, the
        // stand-in for the weak-star limit of the push-forward measures
        for (double rho : rep.mass_radius_grid) {
            double mass = 0.0;
            for (int v = 0; v < c.base().vertex_count(); ++v) {
                if (space.ball_contains(q_space_index,
                                        members[static_cast<std::size_t>(v)], rho)) {
                    mass += c.base().masses[static_cast<std::size_t>(v)];
                }
            }
            rec.ball_masses.push_back(mass);
        }

        // condition (2): metric defect over sampled pairs in B(q, r)
        auto sample_ball_point = [&]() -> ComplexPoint {
            for (int attempt = 0; attempt < 64; ++attempt) {
                int v = ball_vertices[static_cast<std::size_t>(rng.below(ball_vertices.size()))];
                if ((rng.next() & 3) == 0 || c.incident_edges(v).empty()) {
                    return c.vertex_point(v);
                }
                const auto& inc = c.incident_edges(v);
                int e = inc[static_cast<std::size_t>(rng.below(inc.size()))];
                ComplexPoint p = c.edge_point(e, c.epsilon() * (0.05 + 0.9 * rng.unit()));
                if (c.distance(q_pt, p) < r) return p;
            }
            return c.vertex_point(ball_vertices.front());
        };
        for (int i = 0; i < pair_samples && !ball_vertices.empty(); ++i) {
            ComplexPoint P = sample_ball_point();
            ComplexPoint Q = sample_ball_point();
            double dg = c.distance(P, Q);
            if (!std::isfinite(dg)) continue;
            int fp = nearest_vertex_map(c, P);
            int fq = nearest_vertex_map(c, Q);
            double dx = space.distance(members[static_cast<std::size_t>(fp)],
                                       members[static_cast<std::size_t>(fq)]);
            double defect = std::fabs(dx - dg);
            ++rec.pairs_sampled;
            rec.max_metric_defect = std::max(rec.max_metric_defect, defect);
            if (P.is_vertex() && Q.is_vertex()) {
                rec.max_vertex_pair_defect = std::max(rec.max_vertex_pair_defect, defect);
            }
        }
        rec.condition2_pass = rec.max_metric_defect < eta;

        // condition (3): every sample point of B_X(q, r - eta) is within eta
        // of an image vertex
        std::vector<char> in_image(static_cast<std::size_t>(c.base().vertex_count()), 0);
        for (int v : ball_vertices) in_image[static_cast<std::size_t>(v)] = 1;
        const double eps = c.epsilon();
        for (int e = 0; e < static_cast<int>(c.edge_count()); ++e) {
            const auto& ed = c.edge(e);
            double da = dist_q[static_cast<std::size_t>(ed.a)];
            double db = dist_q[static_cast<std::size_t>(ed.b)];
            double hi_a = std::min(eps, r - da);            // covered from a: [0, hi_a)
            double lo_b = std::max(0.0, eps - (r - db));    // covered from b: (lo_b, eps]
            if (hi_a > 0.0) {
                in_image[static_cast<std::size_t>(ed.a)] = 1;
                if (hi_a > eps / 2.0) in_image[static_cast<std::size_t>(ed.b)] = 1;
            }
            if (lo_b < eps) {
                in_image[static_cast<std::size_t>(ed.b)] = 1;
                if (lo_b < eps / 2.0) in_image[static_cast<std::size_t>(ed.a)] = 1;
            }
        }
        std::vector<int> image;
        for (int v = 0; v < c.base().vertex_count(); ++v) {
            if (in_image[static_cast<std::size_t>(v)]) image.push_back(v);
        }

        double defect3 = 0.0;
        if (space.distance_kind() == DistanceKind::euclidean && !image.empty()) {
            UniformGridIndex idx(space.dimension(), std::max(eta, eps));
            for (int v : image) {
                idx.insert(v, space.point(members[static_cast<std::size_t>(v)]));
            }
            for (int z = 0; z < space.size(); ++z) {
                if (!(space.distance(z, q_space_index) < r - eta)) continue;
                auto [w, d] = idx.nearest(space.point(z), [&](int v) {
                    return space.point(members[static_cast<std::size_t>(v)]).data();
                });
                (void)w;
                defect3 = std::max(defect3, d);
            }
        } else {
            for (int z = 0; z < space.size(); ++z) {
                if (!(space.distance(z, q_space_index) < r - eta)) continue;
                double best = std::numeric_limits<double>::infinity();
                for (int v : image) {
                    best = std::min(best,
                                    space.distance(z, members[static_cast<std::size_t>(v)]));
                }
                defect3 = std::max(defect3, best);
            }
        }
        rec.condition3_defect = defect3 + rep.sample_gap;
        rec.condition3_pass = rec.condition3_defect < eta;

        rec.all_pass = rec.condition1_pass && rec.condition2_pass && rec.condition3_pass;
        if (rec.all_pass && rep.i0 < 0) rep.i0 = level_no;
        rep.levels.push_back(std::move(rec));
    }
    return rep;
}

inline nlohmann::ordered_json to_json(const GHCheckReport& r) {
    nlohmann::ordered_json j;
    j["r"] = r.r;
    j["eta"] = r.eta;
    j["i0"] = r.i0;
    j["sample_gap"] = r.sample_gap;
    j["mass_radius_grid"] = r.mass_radius_grid;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rec : r.levels) {
        nlohmann::ordered_json lj;
        lj["level"] = rec.level;
        lj["epsilon"] = rec.epsilon;
        lj["q_vertex"] = rec.q_vertex;
        lj["condition1_pass"] = rec.condition1_pass;
        lj["max_metric_defect"] = rec.max_metric_defect;
        lj["max_vertex_pair_defect"] = rec.max_vertex_pair_defect;
        lj["condition2_pass"] = rec.condition2_pass;
        lj["condition3_defect"] = rec.condition3_defect;
        lj["condition3_pass"] = rec.condition3_pass;
        lj["all_pass"] = rec.all_pass;
        lj["pairs_sampled"] = rec.pairs_sampled;
        lj["ball_masses"] = rec.ball_masses;
        arr.push_back(std::move(lj));
    }
    j["levels"] = std::move(arr);
    return j;
}

}  // namespace mmg
