#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <mmg/net.hpp>

namespace mmg {

// The approximating graph (V, d_V, m): net points as vertices, an edge iff
// epsilon <= d_X <= 3*epsilon, hop metric n*epsilon, and vertex masses
// m(x) = mu(B_X(x, epsilon)).  Immutable after build; self-contained (no
// reference back to the space).
struct NetGraph {
    EpsNet net;
    double epsilon = 0.0;
    int dim = 0;
    std::vector<double> coords;               // V*dim, Euclidean spaces only
    std::vector<double> masses;               // V, strictly positive
    std::vector<double> margins;               // V, distance to sample extent
    std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
    long tolerance_ties = 0;   // threshold comparisons resolved by tolerance
    bool exact_edges = false;  // edge rule decided in integer arithmetic

    int vertex_count() const { return static_cast<int>(masses.size()); }

    std::span<const double> vertex_point(int v) const {
        return {coords.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }

    int degree(int v) const { return static_cast<int>(adjacency[static_cast<std::size_t>(v)].size()); }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& a : adjacency) twice += a.size();
        return twice / 2;
    }

    int max_degree() const {
        int d = 0;
        for (const auto& a : adjacency) d = std::max(d, static_cast<int>(a.size()));
        return d;
    }

    // Vertices whose (3*epsilon + reach)-neighborhood may be truncated by
    // the sample extent are boundary-affected.
    bool interior(int v, double reach = 0.0) const {
        return margins[static_cast<std::size_t>(v)] >= 3.0 * epsilon + reach;
    }
};

struct VertexFunction {
    std::vector<double> values;
};

inline void require_matching(const NetGraph& g, const VertexFunction& u) {
    if (static_cast<int>(u.values.size()) != g.vertex_count()) {
        throw std::invalid_argument("vertex function size does not match graph");
    }
    for (double v : u.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("vertex function must be finite");
    }
}

inline NetGraph build_graph(const SampledSpace& space, const EpsNet& net) {
    NetGraph g;
    g.net = net;
    g.epsilon = net.epsilon;
    g.dim = space.dimension();
    const int V = static_cast<int>(net.member_indices.size());
    g.adjacency.assign(static_cast<std::size_t>(V), {});
    g.masses.resize(static_cast<std::size_t>(V));
    g.margins.resize(static_cast<std::size_t>(V));
    g.exact_edges = space.lattice_scale().has_value();

    const bool euclid = space.distance_kind() == DistanceKind::euclidean && g.dim >= 1 && g.dim <= 3;
    if (euclid) {
        g.coords.reserve(static_cast<std::size_t>(V) * static_cast<std::size_t>(g.dim));
        for (int v = 0; v < V; ++v) {
            auto p = space.point(net.member_indices[static_cast<std::size_t>(v)]);
            g.coords.insert(g.coords.end(), p.begin(), p.end());
        }
    }

    const double eps = net.epsilon;
    auto try_edge = [&](int v, int w) {
        const int pv = net.member_indices[static_cast<std::size_t>(v)];
        const int pw = net.member_indices[static_cast<std::size_t>(w)];
        DistCmp lo = space.compare_distance(pv, pw, eps);
        if (lo.sign == 0 && !lo.exact) ++g.tolerance_ties;
        if (lo.sign < 0) return;  // closer than epsilon: no edge (cannot occur in valid nets)
        DistCmp hi = space.compare_distance(pv, pw, 3.0 * eps);
        if (hi.sign == 0 && !hi.exact) ++g.tolerance_ties;
        if (hi.sign > 0) return;  // farther than 3*epsilon
        g.adjacency[static_cast<std::size_t>(v)].push_back(w);
        g.adjacency[static_cast<std::size_t>(w)].push_back(v);
    };

    if (euclid) {
        UniformGridIndex index(g.dim, 3.0 * eps);
        for (int v = 0; v < V; ++v) index.insert(v, g.vertex_point(v));
        // covers the tolerance tie window around 3*eps
        const double scan = 3.0 * eps + 2e-9 * std::max(1.0, 3.0 * eps);
        for (int v = 0; v < V; ++v) {
            index.for_candidates(g.vertex_point(v), scan, [&](int w) {
                if (w > v) try_edge(v, w);
            });
        }
    } else {
        for (int v = 0; v < V; ++v) {
            for (int w = v + 1; w < V; ++w) try_edge(v, w);
        }
    }
    for (auto& a : g.adjacency) std::sort(a.begin(), a.end());

    // masses: mu(B_X(x, epsilon)); grid-accelerated for empirical Euclidean
    if (space.measure_kind() != MeasureKind::lebesgue_analytic && euclid) {
        UniformGridIndex index(g.dim, eps);
        for (int i = 0; i < space.size(); ++i) index.insert(i, space.point(i));
        const double mass_scan = eps + 2e-9 * std::max(1.0, eps);
        for (int v = 0; v < V; ++v) {
            const int pv = net.member_indices[static_cast<std::size_t>(v)];
            double total = 0.0;
            index.for_candidates(space.point(pv), mass_scan, [&](int i) {
                if (space.ball_contains(pv, i, eps)) total += space.point_weight(i);
            });
            g.masses[static_cast<std::size_t>(v)] = total;
        }
    } else {
        for (int v = 0; v < V; ++v) {
            g.masses[static_cast<std::size_t>(v)] =
                space.ball_measure({net.member_indices[static_cast<std::size_t>(v)], eps});
        }
    }
    for (double m : g.masses) {
        if (!(m > 0.0)) throw std::runtime_error("vertex with nonpositive mass");
    }

    for (int v = 0; v < V; ++v) {
        g.margins[static_cast<std::size_t>(v)] =
            space.boundary_margin(net.member_indices[static_cast<std::size_t>(v)]);
    }
    return g;
}

constexpr std::int32_t kUnreachable = -1;

inline std::vector<std::int32_t> bfs_hops(const NetGraph& g, int src,
                                          std::int32_t max_hops = -1) {
    if (src < 0 || src >= g.vertex_count()) throw std::invalid_argument("vertex out of range");
    std::vector<std::int32_t> hops(static_cast<std::size_t>(g.vertex_count()), kUnreachable);
    std::deque<int> queue;
    hops[static_cast<std::size_t>(src)] = 0;
    queue.push_back(src);
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        std::int32_t h = hops[static_cast<std::size_t>(v)];
        if (max_hops >= 0 && h >= max_hops) continue;
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
            if (hops[static_cast<std::size_t>(w)] == kUnreachable) {
                hops[static_cast<std::size_t>(w)] = h + 1;
                queue.push_back(w);
            }
        }
    }
    return hops;
}

inline std::int32_t hop_distance(const NetGraph& g, int a, int b) {
    if (a == b) {
        if (a < 0 || a >= g.vertex_count()) throw std::invalid_argument("vertex out of range");
        return 0;
    }
    auto hops = bfs_hops(g, a);
    return hops[static_cast<std::size_t>(b)];
}

// d_V(a, b) = hop count * epsilon; +inf when no path exists.
inline double graph_distance(const NetGraph& g, int a, int b) {
    std::int32_t h = hop_distance(g, a, b);
    if (h == kUnreachable) return std::numeric_limits<double>::infinity();
    return static_cast<double>(h) * g.epsilon;
}

// Largest hop count n with n*epsilon < r.  The single division r/epsilon is
// tolerance-checked so near-integer radii resolve deterministically.
inline std::int32_t hop_limit_for_radius(double r, double epsilon) {
    if (!(r > 0.0)) return -1;
    double q = r / epsilon;
    if (q > 1e9) return std::numeric_limits<std::int32_t>::max() / 2;
    double rq = std::round(q);
    if (std::abs(q - rq) <= 1e-9 * std::max(1.0, std::abs(q))) {
        return static_cast<std::int32_t>(rq) - 1;
    }
    return static_cast<std::int32_t>(std::floor(q));
}

// B_V(center, r): all vertices with d_V strictly below r, sorted.
inline std::vector<int> graph_ball(const NetGraph& g, const BallSpec& ball) {
    if (ball.center < 0 || ball.center >= g.vertex_count()) {
        throw std::invalid_argument("ball center out of range");
    }
    std::int32_t limit = hop_limit_for_radius(ball.radius, g.epsilon);
    std::vector<int> out;
    if (limit < 0) return out;
    auto hops = bfs_hops(g, ball.center, limit);
    for (int v = 0; v < g.vertex_count(); ++v) {
        std::int32_t h = hops[static_cast<std::size_t>(v)];
        if (h != kUnreachable && h <= limit) out.push_back(v);
    }
    return out;
}

inline double ball_mass(const NetGraph& g, std::span<const int> vertices) {
    if (vertices.empty()) throw std::invalid_argument("ball mass of an empty vertex set");
    double total = 0.0;
    for (int v : vertices) total += g.masses[static_cast<std::size_t>(v)];
    return total;
}

// Vertices of g lying strictly inside the space ball B_X(center_vertex, r),
// decided by the space's comparison policy (exact on lattices).
inline std::vector<int> euclidean_ball_vertices(const SampledSpace& space, const NetGraph& g,
                                                int center_vertex, double radius) {
    const int pc = g.net.member_indices[static_cast<std::size_t>(center_vertex)];
    std::vector<int> out;
    for (int v = 0; v < g.vertex_count(); ++v) {
        const int pv = g.net.member_indices[static_cast<std::size_t>(v)];
        if (space.ball_contains(pc, pv, radius)) out.push_back(v);
    }
    return out;
}

inline nlohmann::ordered_json graph_to_json(const NetGraph& g) {
    nlohmann::ordered_json j;
    j["epsilon"] = g.epsilon;
    auto verts = nlohmann::ordered_json::array();
    for (int v = 0; v < g.vertex_count(); ++v) {
        nlohmann::ordered_json rec;
        rec["index"] = g.net.member_indices[static_cast<std::size_t>(v)];
        if (!g.coords.empty()) {
            auto p = g.vertex_point(v);
            rec["coords"] = std::vector<double>(p.begin(), p.end());
        } else {
            rec["coords"] = nlohmann::ordered_json::array();
        }
        rec["mass"] = g.masses[static_cast<std::size_t>(v)];
        rec["degree"] = g.degree(v);
        verts.push_back(std::move(rec));
    }
    j["vertices"] = std::move(verts);
    auto edges = nlohmann::ordered_json::array();
    for (int v = 0; v < g.vertex_count(); ++v) {
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
            if (w > v) edges.push_back({v, w});
        }
    }
    j["edges"] = std::move(edges);
    return j;
}

inline void write_adjacency_csv(const NetGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "source,target\n";
    for (int v = 0; v < g.vertex_count(); ++v) {
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
            if (w > v) out << v << "," << w << "\n";
        }
    }
}

}  // namespace mmg
