#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include <mmg/grid_index.hpp>
#include <mmg/space.hpp>
#include <mmg/util.hpp>

namespace mmg {

// A maximal epsilon-separated subset of a SampledSpace.  member_indices are
// sorted sample-point indices; construction is greedy over a seed-shuffled
// ordering, so the result is deterministic per seed.
struct EpsNet {
    double epsilon = 0.0;
    std::vector<int> member_indices;
    std::uint64_t seed = 0;
    std::shared_ptr<const EpsNet> parent;  // the coarser net this refines, if any

    std::uint64_t digest() const {
        std::uint64_t h = 1469598103934665603ull;
        for (int idx : member_indices) {
            std::uint64_t v = static_cast<std::uint64_t>(idx);
            h = fnv1a64(&v, sizeof(v), h);
        }
        return h;
    }
};

namespace detail {

// Greedy admission helper shared by build and refine.  `admitted` may be
// pre-seeded (refinement keeps all coarse members).
class NetBuilder {
public:
    NetBuilder(const SampledSpace& space, double epsilon)
        : space_(space), epsilon_(epsilon) {
        if (space.distance_kind() == DistanceKind::euclidean && space.size() > 0 &&
            space.dimension() >= 1 && space.dimension() <= 3) {
            index_.emplace(space.dimension(), epsilon);
        }
    }

    bool conflicts(int candidate) const {
        // violation iff some admitted point is strictly closer than epsilon;
        // a tolerance tie counts as separated
        auto violates = [&](int other) {
            DistCmp c = space_.compare_distance(candidate, other, epsilon_);
            return c.sign < 0;
        };
        if (index_) {
            bool hit = false;
            index_->for_candidates(space_.point(candidate), epsilon_, [&](int other) {
                if (!hit && violates(other)) hit = true;
            });
            return hit;
        }
        for (int other : admitted_) {
            if (violates(other)) return true;
        }
        return false;
    }

    void admit(int candidate) {
        admitted_.push_back(candidate);
        if (index_) index_->insert(candidate, space_.point(candidate));
    }

    std::vector<int> take() {
        std::sort(admitted_.begin(), admitted_.end());
        return std::move(admitted_);
    }

private:
    const SampledSpace& space_;
    double epsilon_;
    std::optional<UniformGridIndex> index_;
    std::vector<int> admitted_;
};

}  // namespace detail

inline EpsNet build_maximal_net(const SampledSpace& space, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("net epsilon must be positive");
    std::vector<int> order(static_cast<std::size_t>(space.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    seeded_shuffle(order, derive_seed(seed, "net-order"));

    detail::NetBuilder builder(space, epsilon);
    for (int i : order) {
        if (!builder.conflicts(i)) builder.admit(i);
    }
    EpsNet net;
    net.epsilon = epsilon;
    net.seed = seed;
    net.member_indices = builder.take();
    return net;
}

// Halves epsilon, keeps every coarse member, then greedily extends to
// maximality at the finer scale.
inline EpsNet refine_nested(const SampledSpace& space, const EpsNet& coarse, std::uint64_t seed) {
    const double eps = coarse.epsilon / 2.0;
    detail::NetBuilder builder(space, eps);
    for (int i : coarse.member_indices) builder.admit(i);

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(space.size()));
    std::vector<char> is_member(static_cast<std::size_t>(space.size()), 0);
    for (int i : coarse.member_indices) is_member[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < space.size(); ++i) {
        if (!is_member[static_cast<std::size_t>(i)]) order.push_back(i);
    }
    seeded_shuffle(order, derive_seed(seed, "net-refine-order"));
    for (int i : order) {
        if (!builder.conflicts(i)) builder.admit(i);
    }

    EpsNet net;
    net.epsilon = eps;
    net.seed = seed;
    net.member_indices = builder.take();
    net.parent = std::make_shared<EpsNet>(coarse);
    return net;
}

// Max over sample points of the distance to the nearest net member.
// Maximality guarantees the result is < net.epsilon.
inline double hausdorff_gap(const SampledSpace& space, const EpsNet& net) {
    if (net.member_indices.empty()) {
        if (space.size() == 0) return 0.0;
        throw std::invalid_argument("empty net on a nonempty space");
    }
    double gap = 0.0;
    if (space.distance_kind() == DistanceKind::euclidean && space.dimension() >= 1 &&
        space.dimension() <= 3) {
        UniformGridIndex index(space.dimension(), net.epsilon);
        for (int m : net.member_indices) index.insert(m, space.point(m));
        for (int i = 0; i < space.size(); ++i) {
            auto [id, d] = index.nearest(space.point(i),
                                         [&](int j) { return space.point(j).data(); });
            (void)id;
            gap = std::max(gap, d);
        }
        return gap;
    }
    for (int i = 0; i < space.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int m : net.member_indices) best = std::min(best, space.distance(i, m));
        gap = std::max(gap, best);
    }
    return gap;
}

inline nlohmann::ordered_json net_to_json(const EpsNet& net) {
    nlohmann::ordered_json j;
    j["epsilon"] = net.epsilon;
    j["seed"] = net.seed;
    j["member_indices"] = net.member_indices;
    if (net.parent) {
        j["parent_digest"] = net.parent->digest();
    } else {
        j["parent_digest"] = nullptr;
    }
    return j;
}

}  // namespace mmg
