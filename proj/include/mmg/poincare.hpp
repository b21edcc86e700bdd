#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <mmg/analysis.hpp>
#include <mmg/graph.hpp>
#include <mmg/lattice_count.hpp>
#include <mmg/util.hpp>

namespace mmg {

// |grad u|(a) = sum over neighbors b of |u(b) - u(a)| / epsilon.
inline double discrete_gradient(const NetGraph& g, const VertexFunction& u, int a) {
    if (a < 0 || a >= g.vertex_count()) throw std::invalid_argument("vertex out of range");
    double s = 0.0;
    const double ua = u.values[static_cast<std::size_t>(a)];
    for (int b : g.adjacency[static_cast<std::size_t>(a)]) {
        s += std::fabs(u.values[static_cast<std::size_t>(b)] - ua);
    }
    return s / g.epsilon;
}

inline double pow_p(double x, double p) {
    if (p == 1.0) return x;
    if (p == 2.0) return x * x;
    if (p == 3.0) return x * x * x;
    return std::pow(x, p);
}

struct PiSides {
    double lhs = 0.0;         // m-weighted mean of |u - u_B| over B
    double lhs_double = 0.0;  // m^2-weighted double mean of |u(x) - u(y)|
    double rhs = 0.0;         // r * (m-weighted mean of |grad u|^p over lambda B)^(1/p)
    bool pi_violated = false; // rhs == 0 with lhs > 0 (disconnected lambda-ball)
};

// Both left-hand quantities are accumulated from the same per-pair terms
// t = m_y * (u_x - u_y): the signed row sum feeds lhs, the absolute row sum
// feeds lhs_double.  Rounding monotonicity then guarantees the computed
// lhs <= lhs_double, and both depend on value differences only, so constant
// shifts leave them unchanged.
inline PiSides pi_sides_over(const NetGraph& g, std::span<const int> ball,
                             std::span<const int> lambda_ball, double r, double p,
                             const VertexFunction& u) {
    require_matching(g, u);
    if (ball.empty() || lambda_ball.empty()) {
        throw std::invalid_argument("pi_sides needs nonempty balls");
    }
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");

    double mass_b = 0.0;
    for (int x : ball) mass_b += g.masses[static_cast<std::size_t>(x)];

    PiSides out;
    double lhs_num = 0.0, double_num = 0.0;
    for (int x : ball) {
        const double ux = u.values[static_cast<std::size_t>(x)];
        double row_signed = 0.0, row_abs = 0.0;
        for (int y : ball) {
            double t = g.masses[static_cast<std::size_t>(y)] *
                       (ux - u.values[static_cast<std::size_t>(y)]);
            row_signed += t;
            row_abs += std::fabs(t);
        }
        lhs_num += g.masses[static_cast<std::size_t>(x)] * std::fabs(row_signed);
        double_num += g.masses[static_cast<std::size_t>(x)] * row_abs;
    }
    const double mass_sq = mass_b * mass_b;
    out.lhs = lhs_num / mass_sq;
    out.lhs_double = double_num / mass_sq;

    double mass_lb = 0.0, grad_num = 0.0;
    for (int x : lambda_ball) {
        mass_lb += g.masses[static_cast<std::size_t>(x)];
        grad_num += g.masses[static_cast<std::size_t>(x)] * pow_p(discrete_gradient(g, u, x), p);
    }
    double mean = grad_num / mass_lb;
    out.rhs = r * (p == 1.0 ? mean : std::pow(mean, 1.0 / p));
    out.pi_violated = out.rhs == 0.0 && out.lhs > 0.0;
    return out;
}

inline PiSides pi_sides(const NetGraph& g, const BallSpec& ball, double lambda, double p,
                        const VertexFunction& u) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
    auto b = graph_ball(g, ball);
    auto lb = graph_ball(g, {ball.center, lambda * ball.radius});
    return pi_sides_over(g, b, lb, ball.radius, p, u);
}

inline double pi_ratio(const PiSides& s) {
    if (s.lhs == 0.0) return 0.0;
    if (s.rhs == 0.0) return std::numeric_limits<double>::infinity();
    return s.lhs / s.rhs;
}

struct SuitePlan {
    int random_signs = 8;
    int random_gaussians = 8;
    int distance_functions = 4;
    int ascent_steps = 200;
};

// Test functions: coordinate functions, graph-distance-to-vertex functions
// seeded from the support, random +-1 assignments, random Gaussians.
inline std::vector<VertexFunction> test_function_suite(const NetGraph& g,
                                                       std::span<const int> support,
                                                       const SuitePlan& plan,
                                                       std::uint64_t seed) {
    const int V = g.vertex_count();
    std::vector<VertexFunction> suite;
    if (!g.coords.empty()) {
        for (int k = 0; k < g.dim; ++k) {
            VertexFunction u;
            u.values.resize(static_cast<std::size_t>(V));
            for (int v = 0; v < V; ++v) {
                u.values[static_cast<std::size_t>(v)] =
                    g.coords[static_cast<std::size_t>(v) * static_cast<std::size_t>(g.dim) +
                             static_cast<std::size_t>(k)];
            }
            suite.push_back(std::move(u));
        }
    }
    SplitMix64 rng(derive_seed(seed, "pi-suite"));
    for (int i = 0; i < plan.distance_functions && !support.empty(); ++i) {
        int v0 = support[static_cast<std::size_t>(rng.below(support.size()))];
        auto hops = bfs_hops(g, v0);
        std::int32_t far = 0;
        for (std::int32_t h : hops) far = std::max(far, h);
        VertexFunction u;
        u.values.resize(static_cast<std::size_t>(V));
        for (int v = 0; v < V; ++v) {
            std::int32_t h = hops[static_cast<std::size_t>(v)];
            u.values[static_cast<std::size_t>(v)] =
                (h == kUnreachable ? far + 1 : h) * g.epsilon;
        }
        suite.push_back(std::move(u));
    }
    for (int i = 0; i < plan.random_signs; ++i) {
        VertexFunction u;
        u.values.resize(static_cast<std::size_t>(V));
        for (int v = 0; v < V; ++v) {
            u.values[static_cast<std::size_t>(v)] = (rng.next() & 1) ? 1.0 : -1.0;
        }
        suite.push_back(std::move(u));
    }
    for (int i = 0; i < plan.random_gaussians; ++i) {
        VertexFunction u;
        u.values.resize(static_cast<std::size_t>(V));
        for (int v = 0; v < V; ++v) u.values[static_cast<std::size_t>(v)] = rng.gaussian();
        suite.push_back(std::move(u));
    }
    return suite;
}

struct PoincareEstimate {
    double p = 1.0;
    double lambda = 1.0;
    BallSpec ball;
    double C_lower = 0.0;
    std::optional<double> C_exact;
    std::optional<double> C_upper_heuristic;
    VertexFunction argmax;
    bool disconnected_lambda_ball = false;
    int suite_size = 0;
};

namespace detail {

// Connected components of the subgraph induced by `subset`.
inline std::vector<std::vector<int>> induced_components(const NetGraph& g,
                                                        std::span<const int> subset) {
    std::vector<char> in(static_cast<std::size_t>(g.vertex_count()), 0);
    for (int v : subset) in[static_cast<std::size_t>(v)] = 1;
    std::vector<char> seen(static_cast<std::size_t>(g.vertex_count()), 0);
    std::vector<std::vector<int>> comps;
    for (int s : subset) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        std::vector<int> comp, stack{s};
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
                if (in[static_cast<std::size_t>(w)] && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

inline std::vector<int> with_neighbors(const NetGraph& g, std::span<const int> subset) {
    std::vector<char> in(static_cast<std::size_t>(g.vertex_count()), 0);
    std::vector<int> out;
    auto add = [&](int v) {
        if (!in[static_cast<std::size_t>(v)]) {
            in[static_cast<std::size_t>(v)] = 1;
            out.push_back(v);
        }
    };
    for (int v : subset) {
        add(v);
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) add(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Fast lhs/rhs ratio evaluation used inside coordinate ascent (single-mean
// form; the reported constant is recomputed through pi_sides_over).
inline double fast_ratio(const NetGraph& g, std::span<const int> ball,
                         std::span<const int> lambda_ball, double r, double p,
                         const VertexFunction& u) {
    double mb = 0.0, num = 0.0;
    for (int x : ball) mb += g.masses[static_cast<std::size_t>(x)];
    double mean = 0.0;
    for (int x : ball) {
        mean += g.masses[static_cast<std::size_t>(x)] * u.values[static_cast<std::size_t>(x)];
    }
    mean /= mb;
    for (int x : ball) {
        num += g.masses[static_cast<std::size_t>(x)] *
               std::fabs(u.values[static_cast<std::size_t>(x)] - mean);
    }
    double lhs = num / mb;
    double ml = 0.0, gn = 0.0;
    for (int x : lambda_ball) {
        ml += g.masses[static_cast<std::size_t>(x)];
        gn += g.masses[static_cast<std::size_t>(x)] * pow_p(discrete_gradient(g, u, x), p);
    }
    double mean_g = gn / ml;
    double rhs = r * (p == 1.0 ? mean_g : std::pow(mean_g, 1.0 / p));
    if (lhs == 0.0) return 0.0;
    if (rhs == 0.0) return std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

// Heuristic p=2 upper bound: relax |grad u|^2 <= deg * sum of squared edge
// differences / eps^2 and solve the generalized eigenproblem on the span of
// the lambda-ball and its neighbors, grounded at one vertex.
inline std::optional<double> spectral_upper_p2(const NetGraph& g, std::span<const int> ball,
                                               std::span<const int> lambda_ball, double r) {
    auto vars = with_neighbors(g, lambda_ball);
    const int n = static_cast<int>(vars.size());
    if (n < 2 || n > 220) return std::nullopt;
    std::vector<int> pos(static_cast<std::size_t>(g.vertex_count()), -1);
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])] = i;

    auto at = [n](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)];
    };
    std::vector<double> A(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    std::vector<double> G(A.size(), 0.0);

    double mass_b = 0.0;
    for (int x : ball) mass_b += g.masses[static_cast<std::size_t>(x)];
    for (int x : ball) {
        int i = pos[static_cast<std::size_t>(x)];
        at(A, i, i) += g.masses[static_cast<std::size_t>(x)];
    }
    for (int x : ball) {
        for (int y : ball) {
            int i = pos[static_cast<std::size_t>(x)], j = pos[static_cast<std::size_t>(y)];
            at(A, i, j) -= g.masses[static_cast<std::size_t>(x)] *
                           g.masses[static_cast<std::size_t>(y)] / mass_b;
        }
    }
    double mass_l = 0.0;
    const double eps_sq = g.epsilon * g.epsilon;
    for (int a : lambda_ball) {
        mass_l += g.masses[static_cast<std::size_t>(a)];
        double w = g.masses[static_cast<std::size_t>(a)] *
                   static_cast<double>(g.degree(a)) / eps_sq;
        int i = pos[static_cast<std::size_t>(a)];
        for (int b : g.adjacency[static_cast<std::size_t>(a)]) {
            int j = pos[static_cast<std::size_t>(b)];
            at(G, i, i) += w;
            at(G, j, j) += w;
            at(G, i, j) -= w;
            at(G, j, i) -= w;
        }
    }

    // ground variable 0: drop its row/column
    const int m = n - 1;
    std::vector<double> Ar(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    std::vector<double> Gr(Ar.size());
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Ar[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
               static_cast<std::size_t>(j)] = at(A, i + 1, j + 1);
            Gr[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
               static_cast<std::size_t>(j)] = at(G, i + 1, j + 1);
        }
    }
    auto ar = [m](std::vector<double>& M, int i, int j) -> double& {
        return M[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
                 static_cast<std::size_t>(j)];
    };
    // Cholesky of Gr
    std::vector<double> L(Gr);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = ar(L, i, j);
            for (int k = 0; k < j; ++k) s -= ar(L, i, k) * ar(L, j, k);
            if (i == j) {
                if (!(s > 1e-14)) return std::nullopt;  // singular relaxation
                ar(L, i, i) = std::sqrt(s);
            } else {
                ar(L, i, j) = s / ar(L, j, j);
            }
        }
        for (int j = i + 1; j < m; ++j) ar(L, i, j) = 0.0;
    }
    // M = L^-1 Ar L^-T
    std::vector<double> T(Ar);
    for (int col = 0; col < m; ++col) {  // solve L X = Ar columnwise
        for (int i = 0; i < m; ++i) {
            double s = ar(T, i, col);
            for (int k = 0; k < i; ++k) s -= ar(L, i, k) * ar(T, k, col);
            ar(T, i, col) = s / ar(L, i, i);
        }
    }
    std::vector<double> Msym(Ar.size());
    for (int row = 0; row < m; ++row) {  // solve L Y^T = T^T rowwise
        for (int i = 0; i < m; ++i) {
            double s = ar(T, row, i);
            for (int k = 0; k < i; ++k) s -= ar(L, i, k) * ar(Msym, row, k);
            ar(Msym, row, i) = s / ar(L, i, i);
        }
    }
    // Jacobi sweeps for the largest eigenvalue
    for (int sweep = 0; sweep < 40; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) off += ar(Msym, i, j) * ar(Msym, i, j);
        }
        if (off < 1e-22) break;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                double apq = ar(Msym, i, j);
                if (std::fabs(apq) < 1e-18) continue;
                double app = ar(Msym, i, i), aqq = ar(Msym, j, j);
                double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < m; ++k) {
                    double aik = ar(Msym, i, k), ajk = ar(Msym, j, k);
                    ar(Msym, i, k) = c * aik - s * ajk;
                    ar(Msym, j, k) = s * aik + c * ajk;
                }
                for (int k = 0; k < m; ++k) {
                    double aki = ar(Msym, k, i), akj = ar(Msym, k, j);
                    ar(Msym, k, i) = c * aki - s * akj;
                    ar(Msym, k, j) = s * aki + c * akj;
                }
            }
        }
    }
    double lam = 0.0;
    for (int i = 0; i < m; ++i) lam = std::max(lam, ar(Msym, i, i));
    if (!(lam >= 0.0)) return std::nullopt;
    return std::sqrt(lam * mass_l / (mass_b * r * r));
}

}  // namespace detail

struct ExactPiConstant {
    double value = 0.0;
    VertexFunction argmax;
};

// Brute-force oracle for the best p=1 constant on tiny instances.  With
// u_B normalized to zero and the gradient mean pinned at 1/r, the feasible
// set is a bounded polytope whose extreme points are exactly the two-valued
// functions constant on each side of a vertex split; the convex objective
// attains its maximum there, so enumerating all splits is exact.
inline ExactPiConstant exact_constant_p1_tiny(const NetGraph& g, const BallSpec& ball,
                                              double lambda) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
    auto B = graph_ball(g, ball);
    auto LB = graph_ball(g, {ball.center, lambda * ball.radius});
    if (static_cast<int>(LB.size()) > 6) {
        throw std::invalid_argument("oracle restricted to tiny instances");
    }
    ExactPiConstant best;
    best.argmax.values.assign(static_cast<std::size_t>(g.vertex_count()), 0.0);
    const double r = ball.radius;

    for (const auto& comp : detail::induced_components(g, LB)) {
        std::vector<char> in_comp(static_cast<std::size_t>(g.vertex_count()), 0);
        for (int v : comp) in_comp[static_cast<std::size_t>(v)] = 1;
        std::vector<int> Bc;
        for (int v : B) {
            if (in_comp[static_cast<std::size_t>(v)]) Bc.push_back(v);
        }
        if (Bc.empty()) continue;
        auto vars = detail::with_neighbors(g, comp);
        const int n = static_cast<int>(vars.size());
        if (n > 24) throw std::invalid_argument("oracle instance too large");
        std::vector<int> pos(static_cast<std::size_t>(g.vertex_count()), -1);
        for (int i = 0; i < n; ++i) {
            pos[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])] = i;
        }
        double mass_b = 0.0;
        for (int v : Bc) mass_b += g.masses[static_cast<std::size_t>(v)];
        double mass_l = 0.0;
        for (int v : comp) mass_l += g.masses[static_cast<std::size_t>(v)];

        const std::uint32_t lim = 1u << n;
        for (std::uint32_t mask = 1; mask + 1 < lim; ++mask) {
            double mb1 = 0.0;
            for (int v : Bc) {
                if (mask & (1u << pos[static_cast<std::size_t>(v)])) {
                    mb1 += g.masses[static_cast<std::size_t>(v)];
                }
            }
            double mb2 = mass_b - mb1;
            double cross_w = 0.0;
            for (int a : comp) {
                const bool sa = (mask & (1u << pos[static_cast<std::size_t>(a)])) != 0;
                int cross = 0;
                for (int b : g.adjacency[static_cast<std::size_t>(a)]) {
                    const bool sb = (mask & (1u << pos[static_cast<std::size_t>(b)])) != 0;
                    if (sa != sb) ++cross;
                }
                cross_w += g.masses[static_cast<std::size_t>(a)] * cross / g.epsilon;
            }
            if (!(cross_w > 0.0)) continue;
            const double delta = mass_l / (r * cross_w);  // gradient mean pinned at 1/r
            const double lhs = 2.0 * mb1 * mb2 * delta / (mass_b * mass_b);
            if (lhs > best.value) {
                best.value = lhs;
                const double c1 = delta * mb2 / mass_b;
                const double c2 = -delta * mb1 / mass_b;
                std::fill(best.argmax.values.begin(), best.argmax.values.end(), 0.0);
                for (int i = 0; i < n; ++i) {
                    best.argmax.values[static_cast<std::size_t>(vars[static_cast<std::size_t>(i)])] =
                        (mask & (1u << i)) ? c1 : c2;
                }
            }
        }
    }
    return best;
}

inline PoincareEstimate estimate_constant_lower(const NetGraph& g, const BallSpec& ball,
                                                double lambda, double p, const SuitePlan& plan,
                                                std::uint64_t seed) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    auto B = graph_ball(g, ball);
    auto LB = graph_ball(g, {ball.center, lambda * ball.radius});
    if (B.empty() || LB.empty()) throw std::invalid_argument("empty ball");

    PoincareEstimate est;
    est.p = p;
    est.lambda = lambda;
    est.ball = ball;
    est.argmax.values.assign(static_cast<std::size_t>(g.vertex_count()), 0.0);

    auto comps = detail::induced_components(g, LB);
    est.disconnected_lambda_ball = comps.size() > 1;

    auto suite = test_function_suite(g, LB, plan, seed);
    est.suite_size = static_cast<int>(suite.size());

    for (const auto& comp : comps) {
        std::vector<char> in_comp(static_cast<std::size_t>(g.vertex_count()), 0);
        for (int v : comp) in_comp[static_cast<std::size_t>(v)] = 1;
        std::vector<int> Bc;
        for (int v : B) {
            if (in_comp[static_cast<std::size_t>(v)]) Bc.push_back(v);
        }
        if (Bc.empty()) continue;

        VertexFunction best_u;
        double best_ratio = -1.0;
        for (const auto& u : suite) {
            double ratio = pi_ratio(pi_sides_over(g, Bc, comp, ball.radius, p, u));
            if (std::isfinite(ratio) && ratio > best_ratio) {
                best_ratio = ratio;
                best_u = u;
            }
        }
        if (best_ratio < 0.0) continue;

        // normalized coordinate ascent from the best suite function
        auto vars = detail::with_neighbors(g, comp);
        VertexFunction cur = best_u;
        double spread = 0.0;
        for (int v : vars) spread = std::max(spread, std::fabs(cur.values[static_cast<std::size_t>(v)]));
        double step = spread > 0.0 ? 0.25 * spread : 0.25;
        double cur_ratio = detail::fast_ratio(g, Bc, comp, ball.radius, p, cur);
        SplitMix64 rng(derive_seed(seed, "pi-ascent"));
        int taken = 0;
        while (taken < plan.ascent_steps) {
            bool improved = false;
            for (int v : vars) {
                if (taken >= plan.ascent_steps) break;
                ++taken;
                double& val = cur.values[static_cast<std::size_t>(v)];
                const double saved = val;
                double best_local = cur_ratio;
                double best_val = saved;
                for (double dir : {+1.0, -1.0}) {
                    val = saved + dir * step;
                    double cand = detail::fast_ratio(g, Bc, comp, ball.radius, p, cur);
                    if (std::isfinite(cand) && cand > best_local) {
                        best_local = cand;
                        best_val = val;
                    }
                }
                val = best_val;
                if (best_local > cur_ratio) {
                    cur_ratio = best_local;
                    improved = true;
                }
            }
            if (!improved) step *= 0.5;
            if (step < 1e-12) break;
            double m = 0.0;
            for (int v : vars) m = std::max(m, std::fabs(cur.values[static_cast<std::size_t>(v)]));
            if (m > 0.0 && (m > 1e6 || m < 1e-6)) {
                for (int v : vars) cur.values[static_cast<std::size_t>(v)] /= m;
            }
        }
        double final_ratio = pi_ratio(pi_sides_over(g, Bc, comp, ball.radius, p, cur));
        const VertexFunction& winner = final_ratio >= best_ratio ? cur : best_u;
        double winner_ratio = std::max(final_ratio, best_ratio);
        if (winner_ratio > est.C_lower) {
            est.C_lower = winner_ratio;
            est.argmax = winner;
        }
        if (p == 2.0 && !est.C_upper_heuristic) {
            est.C_upper_heuristic = detail::spectral_upper_p2(g, Bc, comp, ball.radius);
        }
    }

    if (p == 1.0 && static_cast<int>(LB.size()) <= 6) {
        try {
            est.C_exact = exact_constant_p1_tiny(g, ball, lambda).value;
        } catch (const std::invalid_argument&) {
            // neighbor closure too large for the oracle; leave C_exact unset
        }
    }
    return est;
}

struct HolderRecord {
    double ratio_p = 0.0;
    double ratio_p_prime = 0.0;
    bool ok = true;
};

struct HolderReport {
    double p = 1.0, p_prime = 1.0;
    std::vector<HolderRecord> records;
    bool all_ok = true;
};

// Power-mean monotonicity: per test function, the PI ratio at p' >= p never
// exceeds the ratio at p.
inline HolderReport holder_lift(const NetGraph& g, const BallSpec& ball, double lambda, double p,
                                double p_prime, const SuitePlan& plan, std::uint64_t seed) {
    if (!(p_prime >= p)) throw std::invalid_argument("holder_lift needs p_prime >= p");
    auto B = graph_ball(g, ball);
    auto LB = graph_ball(g, {ball.center, lambda * ball.radius});
    HolderReport rep;
    rep.p = p;
    rep.p_prime = p_prime;
    for (const auto& u : test_function_suite(g, LB, plan, seed)) {
        HolderRecord rec;
        PiSides a = pi_sides_over(g, B, LB, ball.radius, p, u);
        PiSides b = pi_sides_over(g, B, LB, ball.radius, p_prime, u);
        rec.ratio_p = pi_ratio(a);
        rec.ratio_p_prime = pi_ratio(b);
        if (std::isfinite(rec.ratio_p) && std::isfinite(rec.ratio_p_prime)) {
            rec.ok = rec.ratio_p_prime <= rec.ratio_p * (1.0 + 1e-12) + 1e-300;
        }
        rep.all_ok = rep.all_ok && rec.ok;
        rep.records.push_back(rec);
    }
    return rep;
}

struct GridPiReport {
    int level = 0;
    int n = 0;
    double epsilon = 0.0;
    int ball_vertices = 0;
    long pairs_checked = 0;
    long long max_chain_step_sq = 0;  // exact integer, must be <= 9
    bool chain_ok = true;
    long telescope_violations = 0;
    double empirical_C_single = 0.0;  // max over suite of lhs / rhs at r = n
    double empirical_C_double = 0.0;  // max over suite of lhs_double / rhs
    bool bound_256_ok = true;
};

// Rebuilds the dyadic-grid chaining argument: straight segments between
// sampled ball vertices, nearest-net snapping, consecutive steps within
// 3*epsilon (exact integer check), telescoped differences, and the
// empirical PI constant against the stated 256.
inline GridPiReport grid_pi_certificate(int level, int n, int pair_samples, std::uint64_t seed) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    if (n < 1) throw std::invalid_argument("ball radius n must be >= 1");
    GridPiReport rep;
    rep.level = level;
    rep.n = n;
    const double eps = dyadic_epsilon(level);
    rep.epsilon = eps;
    const long long steps_per_unit = 1LL << (level - 1);
    const long extent = static_cast<long>((n + 1) * steps_per_unit + 3);
    auto space = SampledSpace::make_euclidean_lattice(2, Rational(1, steps_per_unit), extent);
    auto net = build_maximal_net(space, eps, seed);
    auto g = build_graph(space, net);

    int origin = -1;
    for (int v = 0; v < g.vertex_count(); ++v) {
        auto pt = g.vertex_point(v);
        if (pt[0] == 0.0 && pt[1] == 0.0) {
            origin = v;
            break;
        }
    }
    if (origin < 0) throw std::runtime_error("origin vertex not found");

    auto B = euclidean_ball_vertices(space, g, origin, static_cast<double>(n));
    rep.ball_vertices = static_cast<int>(B.size());

    // dyadic-quantized random functions keep the telescoped comparison exact
    SplitMix64 rng(derive_seed(seed, "grid-pi"));
    std::vector<VertexFunction> suite;
    for (int k = 0; k < 2; ++k) {
        VertexFunction u;
        u.values.resize(static_cast<std::size_t>(g.vertex_count()));
        for (int v = 0; v < g.vertex_count(); ++v) {
            u.values[static_cast<std::size_t>(v)] =
                g.coords[static_cast<std::size_t>(v) * 2 + static_cast<std::size_t>(k)];
        }
        suite.push_back(std::move(u));
    }
    for (int i = 0; i < 6; ++i) {
        VertexFunction u;
        u.values.resize(static_cast<std::size_t>(g.vertex_count()));
        for (int v = 0; v < g.vertex_count(); ++v) {
            u.values[static_cast<std::size_t>(v)] =
                static_cast<double>(static_cast<long long>(rng.below(2049)) - 1024) / 1024.0;
        }
        suite.push_back(std::move(u));
    }

    // integer lattice coordinates per vertex for exact chain arithmetic
    auto lat = [&](int v, int k) {
        return static_cast<long long>(
            std::llround(g.vertex_point(v)[static_cast<std::size_t>(k)] / eps));
    };
    std::unordered_map<long long, int> by_cell;
    auto cell_key = [&](long long i, long long j) { return i * 4000003LL + j; };
    for (int v = 0; v < g.vertex_count(); ++v) by_cell[cell_key(lat(v, 0), lat(v, 1))] = v;

    for (int pair = 0; pair < pair_samples && B.size() >= 2; ++pair) {
        int x = B[static_cast<std::size_t>(rng.below(B.size()))];
        int y = B[static_cast<std::size_t>(rng.below(B.size()))];
        if (x == y) continue;
        ++rep.pairs_checked;
        auto px = g.vertex_point(x), py = g.vertex_point(y);
        double T = std::hypot(py[0] - px[0], py[1] - px[1]);
        int k = std::max(1, static_cast<int>(std::ceil(T / eps)));
        std::vector<int> chain;
        chain.reserve(static_cast<std::size_t>(k) + 1);
        chain.push_back(x);
        for (int i = 1; i < k; ++i) {
            double t = static_cast<double>(i) * eps / T;
            double cx = px[0] + t * (py[0] - px[0]);
            double cy = px[1] + t * (py[1] - px[1]);
            long long li = std::llround(cx / eps), lj = std::llround(cy / eps);
            auto it = by_cell.find(cell_key(li, lj));
            if (it == by_cell.end()) throw std::runtime_error("chain left the sample extent");
            if (it->second != chain.back()) chain.push_back(it->second);
        }
        if (chain.back() != y) chain.push_back(y);
        for (std::size_t i = 1; i < chain.size(); ++i) {
            long long di = lat(chain[i], 0) - lat(chain[i - 1], 0);
            long long dj = lat(chain[i], 1) - lat(chain[i - 1], 1);
            long long s = di * di + dj * dj;
            rep.max_chain_step_sq = std::max(rep.max_chain_step_sq, s);
            if (s > 9) rep.chain_ok = false;
        }
        for (const auto& u : suite) {
            double total = 0.0;
            for (std::size_t i = 1; i < chain.size(); ++i) {
                total += std::fabs(u.values[static_cast<std::size_t>(chain[i])] -
                                   u.values[static_cast<std::size_t>(chain[i - 1])]);
            }
            double direct = std::fabs(u.values[static_cast<std::size_t>(x)] -
                                      u.values[static_cast<std::size_t>(y)]);
            if (direct > total) ++rep.telescope_violations;
        }
    }

    for (const auto& u : suite) {
        PiSides s = pi_sides_over(g, B, B, static_cast<double>(n), 1.0, u);
        if (s.rhs == 0.0) continue;
        rep.empirical_C_single = std::max(rep.empirical_C_single, s.lhs / s.rhs);
        rep.empirical_C_double = std::max(rep.empirical_C_double, s.lhs_double / s.rhs);
    }
    rep.bound_256_ok = rep.empirical_C_single <= 256.0 && rep.empirical_C_double <= 256.0;
    return rep;
}

inline nlohmann::ordered_json to_json(const PoincareEstimate& e, bool include_witness = true) {
    nlohmann::ordered_json j;
    j["p"] = e.p;
    j["lambda"] = e.lambda;
    j["ball"] = {{"center", e.ball.center}, {"radius", e.ball.radius}};
    j["C_lower"] = e.C_lower;
    if (e.C_exact) j["C_exact"] = *e.C_exact;
    if (e.C_upper_heuristic) {
        j["C_upper_heuristic"] = *e.C_upper_heuristic;
        j["C_upper_is_heuristic"] = true;
    }
    j["disconnected_lambda_ball"] = e.disconnected_lambda_ball;
    j["suite_size"] = e.suite_size;
    if (include_witness) j["argmax_function"] = e.argmax.values;
    return j;
}

inline nlohmann::ordered_json to_json(const GridPiReport& r) {
    nlohmann::ordered_json j;
    j["level"] = r.level;
    j["n"] = r.n;
    j["epsilon"] = r.epsilon;
    j["ball_vertices"] = r.ball_vertices;
    j["pairs_checked"] = r.pairs_checked;
    j["max_chain_step_sq"] = r.max_chain_step_sq;
    j["chain_ok"] = r.chain_ok;
    j["telescope_violations"] = r.telescope_violations;
    j["empirical_C_single"] = r.empirical_C_single;
    j["empirical_C_double"] = r.empirical_C_double;
    j["bound_256_ok"] = r.bound_256_ok;
    return j;
}

}  // namespace mmg
