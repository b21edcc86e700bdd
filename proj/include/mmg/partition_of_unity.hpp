#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <mmg/graph.hpp>
#include <mmg/grid_index.hpp>
#include <mmg/net.hpp>
#include <mmg/poincare.hpp>
#include <mmg/util.hpp>

namespace mmg {

// Bump functions psi_a(x) = min(1, max(0, 2*eps - d(x,a)) / eps) over the
// net members of a Euclidean sample, normalized into a partition of unity
// phi_a = psi_a / sum_b psi_b.  On the full Euclidean space the distance to
// the complement of B(a, 2*eps) is exactly max(0, 2*eps - d(x,a)); for
// bounded samples this is the same formula, so points within 2*eps of the
// sample extent should be read with that caveat.
class PartitionOfUnity {
public:
    PartitionOfUnity(const SampledSpace& space, const EpsNet& net)
        : dim_(space.dimension()), eps_(net.epsilon), index_(space.dimension(), net.epsilon) {
        if (space.distance_kind() != DistanceKind::euclidean) {
            throw std::invalid_argument("partition of unity requires a Euclidean sample");
        }
        if (net.member_indices.empty()) throw std::invalid_argument("empty net");
        coords_.reserve(net.member_indices.size() * static_cast<std::size_t>(dim_));
        for (int m : net.member_indices) {
            auto p = space.point(m);
            coords_.insert(coords_.end(), p.begin(), p.end());
        }
        for (int k = 0; k < member_count(); ++k) index_.insert(k, member_point(k));
    }

    int dimension() const { return dim_; }
    double epsilon() const { return eps_; }
    int member_count() const { return static_cast<int>(coords_.size() / static_cast<std::size_t>(dim_)); }

    std::span<const double> member_point(int k) const {
        return {coords_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }

    double psi(int member, std::span<const double> x) const {
        double d = dist(member_point(member), x);
        return std::min(1.0, std::max(0.0, 2.0 * eps_ - d) / eps_);
    }

    struct Active {
        int member;
        double phi;
    };

    // Members with psi > 0 at x and their normalized weights.
    std::vector<Active> phi_all(std::span<const double> x) const {
        std::vector<Active> act;
        index_.for_candidates(x, 2.0 * eps_, [&](int k) {
            double p = psi(k, x);
            if (p > 0.0) act.push_back({k, p});
        });
        double denom = 0.0;
        for (const auto& a : act) denom += a.phi;
        if (!(denom > 0.0)) throw std::runtime_error("maximality violated: no active bump");
        for (auto& a : act) a.phi /= denom;
        std::sort(act.begin(), act.end(),
                  [](const Active& a, const Active& b) { return a.member < b.member; });
        return act;
    }

    double sum_phi(std::span<const double> x) const {
        auto act = phi_all(x);
        double s = 0.0;
        for (const auto& a : act) s += a.phi;
        return s;
    }

    // f(x) = sum_a u(a) * phi_a(x)
    double extend(const VertexFunction& u, std::span<const double> x) const {
        auto act = phi_all(x);
        double f = 0.0;
        for (const auto& a : act) f += u.values[static_cast<std::size_t>(a.member)] * a.phi;
        return f;
    }

    std::pair<int, double> nearest_member(std::span<const double> x) const {
        return index_.nearest(x, [&](int k) { return member_point(k).data(); });
    }

    static double dist(std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            double d = a[k] - b[k];
            s += d * d;
        }
        return std::sqrt(s);
    }

private:
    int dim_;
    double eps_;
    std::vector<double> coords_;
    UniformGridIndex index_;
};

namespace detail {

inline std::vector<double> random_direction(int dim, SplitMix64& rng) {
    std::vector<double> d(static_cast<std::size_t>(dim));
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& c : d) {
            c = rng.gaussian();
            norm += c * c;
        }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (double& c : d) c /= norm;
    return d;
}

}  // namespace detail

// Measured Lipschitz constant of the phi family over seeded nearby pairs.
inline double measured_phi_lipschitz(const PartitionOfUnity& pou, int samples,
                                     std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, "phi-lip"));
    const int dim = pou.dimension();
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        int m = static_cast<int>(rng.below(static_cast<std::uint64_t>(pou.member_count())));
        auto base = pou.member_point(m);
        std::vector<double> x(base.begin(), base.end());
        auto dir0 = detail::random_direction(dim, rng);
        double off = 1.8 * pou.epsilon() * rng.unit();
        for (int k = 0; k < dim; ++k) x[static_cast<std::size_t>(k)] += off * dir0[static_cast<std::size_t>(k)];
        auto dir = detail::random_direction(dim, rng);
        double h = pou.epsilon() * (0.01 + 0.4 * rng.unit());
        std::vector<double> y = x;
        for (int k = 0; k < dim; ++k) y[static_cast<std::size_t>(k)] += h * dir[static_cast<std::size_t>(k)];
        double d = PartitionOfUnity::dist(x, y);
        if (!(d > 0.0)) continue;
        auto ax = pou.phi_all(x);
        auto ay = pou.phi_all(y);
        auto phi_at = [](const std::vector<PartitionOfUnity::Active>& act, int member) {
            for (const auto& a : act) {
                if (a.member == member) return a.phi;
            }
            return 0.0;
        };
        for (const auto& a : ax) {
            best = std::max(best, std::fabs(a.phi - phi_at(ay, a.member)) / d);
        }
        for (const auto& a : ay) {
            best = std::max(best, std::fabs(a.phi - phi_at(ax, a.member)) / d);
        }
    }
    return best;
}

struct PointwiseBoundCheck {
    double lip_estimate = 0.0;
    double grad_at_nearest = 0.0;
    double c_eff = 0.0;           // measured phi-Lipschitz constant * eps
    double c_theoretical = 0.0;   // 5 * C_mu^9, reported alongside
    double bound = 0.0;           // c_eff * |grad u(a0)|
    bool pass = true;
    int nearest = -1;
};

// Finite-difference probe of Lip f at x against the discrete gradient at the
// nearest member, per the pointwise transfer bound.  Probing underestimates
// the true local Lipschitz constant, so a failure is a hard counterexample.
inline PointwiseBoundCheck check_pointwise_bound(const PartitionOfUnity& pou, const NetGraph& g,
                                                 const VertexFunction& u,
                                                 std::span<const double> x, double h,
                                                 double phi_lip_global, std::uint64_t seed,
                                                 double C_mu = 4.0, int directions = 64) {
    require_matching(g, u);
    auto [a0, d0] = pou.nearest_member(x);
    if (a0 < 0 || !(d0 < pou.epsilon())) {
        throw std::invalid_argument("probe point is not within epsilon of a net member");
    }
    if (!(h > 0.0) || h > (pou.epsilon() - d0) / 2.0) {
        throw std::invalid_argument("probe radius must satisfy h <= (eps - d(x, a0)) / 2");
    }

    PointwiseBoundCheck out;
    out.nearest = a0;
    out.grad_at_nearest = discrete_gradient(g, u, a0);
    out.c_theoretical = 5.0 * std::pow(C_mu, 9.0);

    auto act_x = pou.phi_all(x);
    const double u0 = u.values[static_cast<std::size_t>(a0)];
    double local_slope = 0.0;

    SplitMix64 rng(derive_seed(seed, "pointwise-probe"));
    std::vector<double> y(x.begin(), x.end());
    for (int i = 0; i < directions; ++i) {
        auto dir = detail::random_direction(pou.dimension(), rng);
        for (double frac : {1.0, 0.5, 0.25}) {
            for (int k = 0; k < pou.dimension(); ++k) {
                y[static_cast<std::size_t>(k)] =
                    x[static_cast<std::size_t>(k)] + frac * h * dir[static_cast<std::size_t>(k)];
            }
            double d = PartitionOfUnity::dist(x, y);
            if (!(d > 0.0)) continue;
            auto act_y = pou.phi_all(y);
            // centered difference: sum over active members of
            // (u(a) - u(a0)) * (phi_a(x) - phi_a(y))
            auto phi_at = [](const std::vector<PartitionOfUnity::Active>& act, int member) {
                for (const auto& a : act) {
                    if (a.member == member) return a.phi;
                }
                return 0.0;
            };
            double df = 0.0;
            auto visit = [&](int member, double px, double py) {
                df += (u.values[static_cast<std::size_t>(member)] - u0) * (px - py);
                local_slope = std::max(local_slope, std::fabs(px - py) / d);
            };
            for (const auto& a : act_x) visit(a.member, a.phi, phi_at(act_y, a.member));
            for (const auto& a : act_y) {
                if (phi_at(act_x, a.member) == 0.0) visit(a.member, 0.0, a.phi);
            }
            out.lip_estimate = std::max(out.lip_estimate, std::fabs(df) / d);
        }
    }
    out.c_eff = std::max(phi_lip_global, local_slope) * pou.epsilon();
    out.bound = out.c_eff * out.grad_at_nearest;
    out.pass = out.lip_estimate <= out.bound * (1.0 + 1e-12) + 1e-300;
    return out;
}

struct LipGradIntegralCheck {
    double lhs_integral = 0.0;  // Monte-Carlo estimate over B_X(x, r)
    double rhs_integral = 0.0;  // C_eff^p * sum over the transfer net ball
    double c_eff = 0.0;
    int mc_points = 0;
    bool pass = true;
};

// Integral transfer bound: the p-th power of the probed Lipschitz constant
// integrated over a space ball, against the discrete gradient energy over
// B_V(a0, (L+1)(r + 2*eps)).
inline LipGradIntegralCheck lip_gradient_integral_check(const SampledSpace& space,
                                                        const PartitionOfUnity& pou,
                                                        const NetGraph& g, const VertexFunction& u,
                                                        std::span<const double> center, double r,
                                                        double p, double L,
                                                        double phi_lip_global, int mc_points,
                                                        std::uint64_t seed) {
    require_matching(g, u);
    if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
    LipGradIntegralCheck out;
    out.mc_points = mc_points;

    SplitMix64 rng(derive_seed(seed, "lip-grad-mc"));
    const int dim = pou.dimension();
    double acc = 0.0;
    double local_slope_max = phi_lip_global;
    std::vector<double> z(static_cast<std::size_t>(dim));
    for (int i = 0; i < mc_points; ++i) {
        // uniform in the Euclidean ball: direction * r * U^(1/dim)
        auto dir = detail::random_direction(dim, rng);
        double rho = r * std::pow(rng.unit(), 1.0 / dim);
        for (int k = 0; k < dim; ++k) {
            z[static_cast<std::size_t>(k)] =
                center[static_cast<std::size_t>(k)] + rho * dir[static_cast<std::size_t>(k)];
        }
        auto [a0, d0] = pou.nearest_member(z);
        if (!(d0 < pou.epsilon())) {
            throw std::runtime_error("integration point not covered by the net");
        }
        double h = 0.2 * (pou.epsilon() - d0) / 2.0;
        auto probe = check_pointwise_bound(pou, g, u, z, h, phi_lip_global, rng.next(), 4.0, 16);
        local_slope_max = std::max(local_slope_max, probe.c_eff / pou.epsilon());
        acc += pow_p(probe.lip_estimate, p);
    }
    double mu_ball = 0.0;
    if (space.measure_kind() == MeasureKind::lebesgue_analytic) {
        mu_ball = SampledSpace::analytic_ball_volume(dim, r);
    } else {
        for (int i = 0; i < space.size(); ++i) {
            if (space.distance_to(i, center) < r) mu_ball += space.point_weight(i);
        }
    }
    out.lhs_integral = mu_ball * acc / std::max(1, mc_points);

    out.c_eff = local_slope_max * pou.epsilon();
    auto [a0, d0] = pou.nearest_member(center);
    (void)d0;
    auto net_ball = graph_ball(g, {a0, (L + 1.0) * (r + 2.0 * pou.epsilon())});
    double energy = 0.0;
    for (int v : net_ball) {
        energy += pow_p(discrete_gradient(g, u, v), p) * g.masses[static_cast<std::size_t>(v)];
    }
    out.rhs_integral = pow_p(out.c_eff, p) * energy;
    out.pass = out.lhs_integral <= out.rhs_integral * (1.0 + 1e-12) + 1e-300;
    return out;
}

}  // namespace mmg
