#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <mmg/util.hpp>

namespace mmg {

// Uniform-grid index for fixed-radius neighbor queries over Euclidean
// points in dimension <= 3.  Candidate enumeration is by L-inf cell range,
// a superset of the Euclidean ball; callers filter by true distance.
class UniformGridIndex {
public:
    UniformGridIndex(int dim, double cell_side) : dim_(dim), cell_(cell_side) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("grid index supports dim 1..3");
        if (!(cell_side > 0.0)) throw std::invalid_argument("grid index needs positive cell side");
    }

    void insert(int id, std::span<const double> x) {
        cells_[key_of(x)].push_back(id);
        ++count_;
    }

    std::size_t size() const { return count_; }

    template <class F>
    void for_candidates(std::span<const double> x, double radius, F&& f) const {
        std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int k = 0; k < dim_; ++k) {
            lo[static_cast<std::size_t>(k)] = cell_coord(x[static_cast<std::size_t>(k)] - radius);
            hi[static_cast<std::size_t>(k)] = cell_coord(x[static_cast<std::size_t>(k)] + radius);
        }
        std::array<std::int64_t, 3> c = lo;
        while (true) {
            auto it = cells_.find(c);
            if (it != cells_.end()) {
                for (int id : it->second) f(id);
            }
            int k = 0;
            for (; k < dim_; ++k) {
                std::size_t ks = static_cast<std::size_t>(k);
                if (++c[ks] <= hi[ks]) break;
                c[ks] = lo[ks];
            }
            if (k == dim_) break;
        }
    }

    // Distance from x to the nearest indexed point, with its id.
    // Requires a point-position accessor pos(id) -> span/const double*.
    template <class Pos>
    std::pair<int, double> nearest(std::span<const double> x, Pos&& pos) const {
        if (count_ == 0) return {-1, std::numeric_limits<double>::infinity()};
        double r = cell_;
        while (true) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for_candidates(x, r, [&](int id) {
                const double* p = pos(id);
                double s = 0.0;
                for (int k = 0; k < dim_; ++k) {
                    double dk = x[static_cast<std::size_t>(k)] - p[k];
                    s += dk * dk;
                }
                double d = std::sqrt(s);
                if (d < best_d) {
                    best_d = d;
                    best = id;
                }
            });
            // every point closer than best_d lies inside the scanned box
            if (best >= 0 && best_d <= r) return {best, best_d};
            r *= 2.0;
        }
    }

private:
    struct KeyHash {
        std::size_t operator()(const std::array<std::int64_t, 3>& k) const noexcept {
            return static_cast<std::size_t>(fnv1a64(k.data(), sizeof(k)));
        }
    };

    std::int64_t cell_coord(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_));
    }

    std::array<std::int64_t, 3> key_of(std::span<const double> x) const {
        std::array<std::int64_t, 3> k{0, 0, 0};
        for (int i = 0; i < dim_; ++i) {
            k[static_cast<std::size_t>(i)] = cell_coord(x[static_cast<std::size_t>(i)]);
        }
        return k;
    }

    int dim_;
    double cell_;
    std::size_t count_ = 0;
    std::unordered_map<std::array<std::int64_t, 3>, std::vector<int>, KeyHash> cells_;
};

}  // namespace mmg
