#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <mmg/analysis.hpp>
#include <mmg/graph.hpp>
#include <mmg/poincare.hpp>
#include <mmg/util.hpp>

namespace mmg {

enum class ComplexMetricMode {
    graph_derived,  // vertex distances are d_V = hop * epsilon
    space_derived,  // vertex distances are d_X (the metric rebase)
};

// A point of the one-complex: either a vertex, or a position t in [0, eps]
// along an edge measured from the lower-indexed endpoint.
struct ComplexPoint {
    int vertex = -1;
    int edge = -1;
    double t = 0.0;

    bool is_vertex() const { return vertex >= 0; }
};

// The connected extension of a net graph: an isometric copy of [0, eps]
// between each pair of neighbors, carrying the edge measure built from the
// endpoint masses.  Points on edges are addressed symbolically; the complex
// is never embedded in coordinates.
class OneComplex {
public:
    struct Edge {
        int a = 0, b = 0;  // a < b
    };

    static OneComplex build(const SampledSpace& space, const NetGraph& g,
                            ComplexMetricMode mode) {
        OneComplex c;
        c.g_ = g;
        c.mode_ = mode;
        c.incident_.assign(static_cast<std::size_t>(g.vertex_count()), {});
        for (int v = 0; v < g.vertex_count(); ++v) {
            for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
                if (w > v) {
                    c.incident_[static_cast<std::size_t>(v)].push_back(
                        static_cast<int>(c.edges_.size()));
                    c.incident_[static_cast<std::size_t>(w)].push_back(
                        static_cast<int>(c.edges_.size()));
                    c.edges_.push_back({v, w});
                }
            }
        }
        if (mode == ComplexMetricMode::space_derived) {
            if (space.distance_kind() == DistanceKind::euclidean) {
                c.euclid_dx_ = true;  // coordinates already copied inside g
            } else {
                const int V = g.vertex_count();
                if (static_cast<long long>(V) * V > 40'000'000LL) {
                    throw std::invalid_argument("explicit-matrix rebase too large");
                }
                c.dx_.resize(static_cast<std::size_t>(V) * static_cast<std::size_t>(V));
                for (int i = 0; i < V; ++i) {
                    for (int j = 0; j < V; ++j) {
                        c.dx_[static_cast<std::size_t>(i) * static_cast<std::size_t>(V) +
                              static_cast<std::size_t>(j)] =
                            space.distance(g.net.member_indices[static_cast<std::size_t>(i)],
                                           g.net.member_indices[static_cast<std::size_t>(j)]);
                    }
                }
            }
        }
        return c;
    }

    const NetGraph& base() const { return g_; }
    ComplexMetricMode mode() const { return mode_; }
    double epsilon() const { return g_.epsilon; }
    std::size_t edge_count() const { return edges_.size(); }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    const std::vector<int>& incident_edges(int v) const {
        return incident_[static_cast<std::size_t>(v)];
    }

    // m_bar of a full edge: m(a) + m(b).
    double edge_measure(int e) const {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        return g_.masses[static_cast<std::size_t>(ed.a)] +
               g_.masses[static_cast<std::size_t>(ed.b)];
    }

    ComplexPoint vertex_point(int v) const {
        ComplexPoint p;
        p.vertex = v;
        return p;
    }

    // Canonicalized edge point: endpoints collapse to vertices.
    ComplexPoint edge_point(int e, double t) const {
        if (t < 0.0 || t > g_.epsilon * (1.0 + 1e-12)) {
            throw std::invalid_argument("edge offset outside [0, eps]");
        }
        if (t == 0.0) return vertex_point(edges_[static_cast<std::size_t>(e)].a);
        if (t >= g_.epsilon) return vertex_point(edges_[static_cast<std::size_t>(e)].b);
        ComplexPoint p;
        p.edge = e;
        p.t = t;
        return p;
    }

    // Base metric between vertices: d_V (BFS) or d_X depending on mode.
    double vertex_metric(int a, int b) const {
        if (mode_ == ComplexMetricMode::graph_derived) return graph_distance(g_, a, b);
        return dx(a, b);
    }

    // Distances from every vertex to v under the base metric; one BFS in
    // graph-derived mode.
    std::vector<double> vertex_metric_row(int v) const {
        std::vector<double> row(static_cast<std::size_t>(g_.vertex_count()));
        if (mode_ == ComplexMetricMode::graph_derived) {
            auto hops = bfs_hops(g_, v);
            for (int w = 0; w < g_.vertex_count(); ++w) {
                std::int32_t h = hops[static_cast<std::size_t>(w)];
                row[static_cast<std::size_t>(w)] =
                    h == kUnreachable ? std::numeric_limits<double>::infinity()
                                      : static_cast<double>(h) * g_.epsilon;
            }
        } else {
            for (int w = 0; w < g_.vertex_count(); ++w) {
                row[static_cast<std::size_t>(w)] = dx(v, w);
            }
        }
        return row;
    }

    // Distance between two complex points: within-edge shortcut when they
    // share an edge, else the minimum over the four endpoint routings.
    double distance(const ComplexPoint& P, const ComplexPoint& Q) const {
        if (P.is_vertex() && Q.is_vertex()) return vertex_metric(P.vertex, Q.vertex);
        if (P.is_vertex()) return vertex_to_edge(P.vertex, Q);
        if (Q.is_vertex()) return vertex_to_edge(Q.vertex, P);
        const Edge& ep = edges_[static_cast<std::size_t>(P.edge)];
        const Edge& eq = edges_[static_cast<std::size_t>(Q.edge)];
        double best = std::numeric_limits<double>::infinity();
        if (P.edge == Q.edge) best = std::fabs(P.t - Q.t);
        const double eps = g_.epsilon;
        const double legs_p[2] = {P.t, eps - P.t};
        const int ends_p[2] = {ep.a, ep.b};
        const double legs_q[2] = {Q.t, eps - Q.t};
        const int ends_q[2] = {eq.a, eq.b};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                double mid = vertex_metric(ends_p[i], ends_q[j]);
                best = std::min(best, legs_p[i] + mid + legs_q[j]);
            }
        }
        return best;
    }

    double distance_to_vertex(const ComplexPoint& P, int w) const {
        return vertex_to_edge(w, P);
    }

private:
    double vertex_to_edge(int v, const ComplexPoint& Q) const {
        if (Q.is_vertex()) return vertex_metric(v, Q.vertex);
        const Edge& e = edges_[static_cast<std::size_t>(Q.edge)];
        return std::min(vertex_metric(v, e.a) + Q.t,
                        vertex_metric(v, e.b) + (g_.epsilon - Q.t));
    }

    double dx(int a, int b) const {
        if (euclid_dx_) {
            auto pa = g_.vertex_point(a);
            auto pb = g_.vertex_point(b);
            double s = 0.0;
            for (std::size_t k = 0; k < pa.size(); ++k) {
                double d = pa[k] - pb[k];
                s += d * d;
            }
            return std::sqrt(s);
        }
        return dx_[static_cast<std::size_t>(a) * static_cast<std::size_t>(g_.vertex_count()) +
                   static_cast<std::size_t>(b)];
    }

    NetGraph g_;
    ComplexMetricMode mode_ = ComplexMetricMode::graph_derived;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> incident_;
    std::vector<double> dx_;
    bool euclid_dx_ = false;
};

// Evaluator for the edge measure m_bar: additive over disjoint subintervals,
// with every full edge weighing m(a) + m(b).
struct ComplexMeasure {
    const OneComplex* complex = nullptr;

    explicit ComplexMeasure(const OneComplex& c) : complex(&c) {}

    double edge_measure(int e) const { return complex->edge_measure(e); }

    // Exact mass of the metric ball B(P, r): per edge the ball meets at most
    // a union of closed-form subintervals.
    double ball_mass(const ComplexPoint& P, double r) const {
        if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
        const OneComplex& c = *complex;
        const double eps = c.epsilon();

        // distances from P to every vertex
        std::vector<double> dist_v;
        if (P.is_vertex()) {
            dist_v = c.vertex_metric_row(P.vertex);
        } else {
            const auto& e = c.edge(P.edge);
            auto ra = c.vertex_metric_row(e.a);
            auto rb = c.vertex_metric_row(e.b);
            dist_v.resize(ra.size());
            for (std::size_t i = 0; i < ra.size(); ++i) {
                dist_v[i] = std::min(P.t + ra[i], (eps - P.t) + rb[i]);
            }
        }

        double total = 0.0;
        for (int e = 0; e < static_cast<int>(c.edge_count()); ++e) {
            const auto& ed = c.edge(e);
            double da = dist_v[static_cast<std::size_t>(ed.a)];
            double db = dist_v[static_cast<std::size_t>(ed.b)];
            // covered parameter set on [0, eps]
            double lo1 = 0.0, hi1 = std::min(eps, r - da);          // from endpoint a
            double lo2 = std::max(0.0, eps - (r - db)), hi2 = eps;  // from endpoint b
            double lo3 = 1.0, hi3 = 0.0;                            // same-edge shortcut
            if (!P.is_vertex() && P.edge == e) {
                lo3 = std::max(0.0, P.t - r);
                hi3 = std::min(eps, P.t + r);
            }
            double len = union_length(lo1, hi1, lo2, hi2, lo3, hi3);
            if (len > 0.0) total += (len / eps) * c.edge_measure(e);
        }
        return total;
    }

private:
    static double union_length(double a0, double a1, double b0, double b1, double c0, double c1) {
        struct I {
            double lo, hi;
        };
        I iv[3] = {{a0, a1}, {b0, b1}, {c0, c1}};
        int n = 0;
        I keep[3];
        for (const auto& i : iv) {
            if (i.hi > i.lo) keep[n++] = i;
        }
        if (n == 0) return 0.0;
        std::sort(keep, keep + n, [](const I& x, const I& y) { return x.lo < y.lo; });
        double total = 0.0, lo = keep[0].lo, hi = keep[0].hi;
        for (int i = 1; i < n; ++i) {
            if (keep[i].lo <= hi) {
                hi = std::max(hi, keep[i].hi);
            } else {
                total += hi - lo;
                lo = keep[i].lo;
                hi = keep[i].hi;
            }
        }
        total += hi - lo;
        return total;
    }
};

inline OneComplex build_complex(const SampledSpace& space, const NetGraph& g,
                                ComplexMetricMode mode) {
    return OneComplex::build(space, g, mode);
}

// Doubling scan for the edge measure over sampled vertices and midpoints.
inline DoublingReport estimate_doubling_complex(const OneComplex& c,
                                                const std::vector<double>& radii, int n_centers,
                                                std::uint64_t seed) {
    for (double r : radii) {
        if (!(r > 0.0)) throw std::invalid_argument("radii must be positive");
    }
    ComplexMeasure cm(c);
    DoublingReport rep;
    rep.target = "complex";
    rep.radii = radii;

    std::vector<ComplexPoint> centers;
    std::vector<int> verts;
    for (int v = 0; v < c.base().vertex_count(); ++v) {
        if (!c.incident_edges(v).empty()) verts.push_back(v);
    }
    seeded_shuffle(verts, derive_seed(seed, "complex-doubling-centers"));
    for (int i = 0; i < std::min<int>(n_centers / 2, static_cast<int>(verts.size())); ++i) {
        centers.push_back(c.vertex_point(verts[static_cast<std::size_t>(i)]));
    }
    SplitMix64 rng(derive_seed(seed, "complex-doubling-midpoints"));
    for (int i = 0; i < n_centers - static_cast<int>(centers.size()) && c.edge_count() > 0; ++i) {
        int e = static_cast<int>(rng.below(c.edge_count()));
        centers.push_back(c.edge_point(e, 0.5 * c.epsilon()));
    }
    rep.sampled_centers = static_cast<int>(centers.size());

    for (const auto& ctr : centers) {
        for (double r : radii) {
            double small = cm.ball_mass(ctr, r);
            double big = cm.ball_mass(ctr, 2.0 * r);
            if (!(small > 0.0) || !(big > 0.0)) {
                throw std::runtime_error("ball of zero mass in complex doubling estimate");
            }
            double ratio = big / small;
            double tag = ctr.is_vertex() ? static_cast<double>(ctr.vertex)
                                         : -1.0 - static_cast<double>(ctr.edge);
            rep.table.push_back({tag, r, ratio});
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.witness_center = ctr.is_vertex() ? ctr.vertex : -1 - ctr.edge;
                rep.witness_radius = r;
            }
        }
    }
    return rep;
}

struct LinearEnergyReport {
    double linear_energy_total = 0.0;
    long edges_checked = 0;
    long perturbations_per_edge = 0;
    long violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
};

// Linear interpolation minimizes the p-energy on each edge among continuous
// piecewise-linear competitors with the same endpoint values.  Perturbations
// carry a forced interior extremum so the comparison is strict.
inline LinearEnergyReport linear_extension_energy(const OneComplex& c, const VertexFunction& u,
                                                  double p, int perturbations,
                                                  std::uint64_t seed) {
    require_matching(c.base(), u);
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    LinearEnergyReport rep;
    rep.perturbations_per_edge = perturbations;

    const double eps = c.epsilon();
    const int segments = 8;
    SplitMix64 rng(derive_seed(seed, "linear-energy"));
    for (int e = 0; e < static_cast<int>(c.edge_count()); ++e) {
        const auto& ed = c.edge(e);
        const double ua = u.values[static_cast<std::size_t>(ed.a)];
        const double ub = u.values[static_cast<std::size_t>(ed.b)];
        const double density = c.edge_measure(e) / eps;
        const double linear = pow_p(std::fabs(ub - ua) / eps, p) * c.edge_measure(e);
        rep.linear_energy_total += linear;
        ++rep.edges_checked;

        for (int trial = 0; trial < perturbations; ++trial) {
            // bump amplitude above |ub-ua|/2 guarantees a slope sign change
            double amp = (0.6 + 0.8 * rng.unit()) * std::max(std::fabs(ub - ua), 1.0);
            if (rng.next() & 1) amp = -amp;
            double energy = 0.0;
            double prev = ua;
            const double h = eps / segments;
            for (int s = 1; s <= segments; ++s) {
                double frac = static_cast<double>(s) / segments;
                double hat = frac < 0.5 ? 2.0 * frac : 2.0 * (1.0 - frac);
                double noise = 1.0 + 0.3 * rng.symmetric();
                double val = s == segments ? ub : ua + (ub - ua) * frac + amp * hat * noise;
                energy += pow_p(std::fabs(val - prev) / h, p) * density * h;
                prev = val;
            }
            double margin = energy - linear;
            rep.min_margin = std::min(rep.min_margin, margin);
            if (energy < linear) ++rep.violations;
        }
    }
    return rep;
}

struct ComplexPiEstimate {
    double p = 1.0;
    double lambda = 1.0;
    double r = 0.0;
    double best_ratio = 0.0;
    double base_graph_ratio = 0.0;  // same suite on the base graph ball
    double factor = 0.0;            // best_ratio / base_graph_ratio when defined
    bool case1 = false;             // r <= epsilon
    int suite_size = 0;
};

// Continuous-form PI ratio over piecewise-linear test functions sampled at
// k=8 quadrature points per covered edge interval, with the edge measure.
inline ComplexPiEstimate complex_pi_check(const OneComplex& c, const ComplexMeasure& cm,
                                          const ComplexPoint& center, double r, double p,
                                          double lambda, const SuitePlan& plan,
                                          std::uint64_t seed) {
    if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
    const double eps = c.epsilon();
    ComplexPiEstimate est;
    est.p = p;
    est.lambda = lambda;
    est.r = r;
    est.case1 = r <= eps;

    // distances from the center to all vertices
    std::vector<double> dist_v;
    if (center.is_vertex()) {
        dist_v = c.vertex_metric_row(center.vertex);
    } else {
        const auto& e = c.edge(center.edge);
        auto ra = c.vertex_metric_row(e.a);
        auto rb = c.vertex_metric_row(e.b);
        dist_v.resize(ra.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            dist_v[i] = std::min(center.t + ra[i], (eps - center.t) + rb[i]);
        }
    }

    struct Interval {
        int edge;
        double lo, hi;
    };
    auto covered = [&](double radius) {
        std::vector<Interval> out;
        for (int e = 0; e < static_cast<int>(c.edge_count()); ++e) {
            const auto& ed = c.edge(e);
            double da = dist_v[static_cast<std::size_t>(ed.a)];
            double db = dist_v[static_cast<std::size_t>(ed.b)];
            double spans[3][2] = {{0.0, std::min(eps, radius - da)},
                                  {std::max(0.0, eps - (radius - db)), eps},
                                  {1.0, 0.0}};
            if (!center.is_vertex() && center.edge == e) {
                spans[2][0] = std::max(0.0, center.t - radius);
                spans[2][1] = std::min(eps, center.t + radius);
            }
            // merge the up-to-three spans
            std::vector<std::pair<double, double>> keep;
            for (auto& s : spans) {
                if (s[1] > s[0]) keep.emplace_back(s[0], s[1]);
            }
            std::sort(keep.begin(), keep.end());
            for (std::size_t i = 0; i < keep.size(); ++i) {
                double lo = keep[i].first, hi = keep[i].second;
                while (i + 1 < keep.size() && keep[i + 1].first <= hi) {
                    hi = std::max(hi, keep[i + 1].second);
                    ++i;
                }
                out.push_back({e, lo, hi});
            }
        }
        return out;
    };

    auto ball = covered(r);
    auto lambda_ball = covered(lambda * r);
    if (ball.empty() || lambda_ball.empty()) {
        throw std::invalid_argument("empty complex ball");
    }

    std::vector<int> support;
    for (const auto& iv : lambda_ball) {
        support.push_back(c.edge(iv.edge).a);
        support.push_back(c.edge(iv.edge).b);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    auto suite = test_function_suite(c.base(), support, plan, seed);
    est.suite_size = static_cast<int>(suite.size());

    const int k = 8;
    for (const auto& u : suite) {
        // quadrature over the ball for the mean and the deviation
        double mass = 0.0, mean_acc = 0.0;
        auto for_nodes = [&](const Interval& iv, auto&& f) {
            const auto& ed = c.edge(iv.edge);
            double ua = u.values[static_cast<std::size_t>(ed.a)];
            double ub = u.values[static_cast<std::size_t>(ed.b)];
            double density = cm.edge_measure(iv.edge) / eps;
            double len = iv.hi - iv.lo;
            if (!(len > 0.0)) return;
            double dt = len / (k - 1);
            for (int q = 0; q < k; ++q) {
                double t = iv.lo + dt * q;
                double w = density * dt * ((q == 0 || q == k - 1) ? 0.5 : 1.0);
                double val = ua + (ub - ua) * (t / eps);
                f(val, w);
            }
        };
        for (const auto& iv : ball) {
            for_nodes(iv, [&](double val, double w) {
                mass += w;
                mean_acc += w * val;
            });
        }
        if (!(mass > 0.0)) continue;
        double mean = mean_acc / mass;
        double dev = 0.0;
        for (const auto& iv : ball) {
            for_nodes(iv, [&](double val, double w) { dev += w * std::fabs(val - mean); });
        }
        double lhs = dev / mass;

        double lmass = 0.0, energy = 0.0;
        for (const auto& iv : lambda_ball) {
            const auto& ed = c.edge(iv.edge);
            double slope = std::fabs(u.values[static_cast<std::size_t>(ed.b)] -
                                     u.values[static_cast<std::size_t>(ed.a)]) /
                           eps;
            double density = cm.edge_measure(iv.edge) / eps;
            double len = iv.hi - iv.lo;
            lmass += density * len;
            energy += pow_p(slope, p) * density * len;
        }
        double rhs = r * (p == 1.0 ? energy / lmass : std::pow(energy / lmass, 1.0 / p));
        if (rhs > 0.0 && lhs > 0.0) est.best_ratio = std::max(est.best_ratio, lhs / rhs);

        // base-graph comparison on the vertex ball of the same radius
        if (center.is_vertex()) {
            auto bb = graph_ball(c.base(), {center.vertex, std::max(r, eps * 1.5)});
            auto lbb = graph_ball(c.base(), {center.vertex, std::max(lambda * r, eps * 1.5)});
            PiSides s = pi_sides_over(c.base(), bb, lbb, r, p, u);
            double ratio = pi_ratio(s);
            if (std::isfinite(ratio)) est.base_graph_ratio = std::max(est.base_graph_ratio, ratio);
        }
    }
    if (est.base_graph_ratio > 0.0) est.factor = est.best_ratio / est.base_graph_ratio;
    return est;
}

struct ModeEquivalenceReport {
    double L_bound = 1.0;     // the constant the ratios are checked against
    double max_ratio = 1.0;   // max over pairs of max(dG/dTilde, dTilde/dG)
    long pairs = 0;
    long violations = 0;
    bool ok = true;
};

// Bi-Lipschitz equivalence of the two complex metrics on sampled point
// pairs, against the measured vertex constant.
inline ModeEquivalenceReport check_mode_bilipschitz(const OneComplex& tilde,
                                                    const OneComplex& rebased, double L,
                                                    int pairs, std::uint64_t seed) {
    if (tilde.edge_count() != rebased.edge_count()) {
        throw std::invalid_argument("complexes must share their base graph");
    }
    ModeEquivalenceReport rep;
    rep.L_bound = L;
    SplitMix64 rng(derive_seed(seed, "mode-bilip"));
    const double eps = tilde.epsilon();
    auto sample_point = [&](const OneComplex& c) {
        if (c.edge_count() == 0 || (rng.next() & 3) == 0) {
            int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.base().vertex_count())));
            return c.vertex_point(v);
        }
        int e = static_cast<int>(rng.below(c.edge_count()));
        return c.edge_point(e, eps * (0.05 + 0.9 * rng.unit()));
    };
    for (int i = 0; i < pairs; ++i) {
        ComplexPoint P = sample_point(tilde);
        ComplexPoint Q = sample_point(tilde);
        double dt = tilde.distance(P, Q);
        double dg = rebased.distance(P, Q);
        if (!std::isfinite(dt) || !std::isfinite(dg)) continue;
        if (dt == 0.0 && dg == 0.0) continue;
        ++rep.pairs;
        double ratio = std::max(dg / dt, dt / dg);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        if (ratio > L * (1.0 + 1e-9)) ++rep.violations;
    }
    rep.ok = rep.violations == 0;
    return rep;
}

}  // namespace mmg
