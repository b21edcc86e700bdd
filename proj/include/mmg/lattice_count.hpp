#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mmg {

// Exact count of integer pairs (j, k) with j^2 + k^2 < r_sq (open disc),
// by row scan with integer-corrected square roots.
inline long long open_disc_lattice_count(long long r_sq) {
    if (r_sq <= 0) return 0;
    long long n = 0;
    auto jmax = static_cast<long long>(std::sqrt(static_cast<double>(r_sq))) + 2;
    for (long long j = -jmax; j <= jmax; ++j) {
        long long rem = r_sq - j * j;
        if (rem <= 0) continue;
        auto k = static_cast<long long>(std::sqrt(static_cast<double>(rem)));
        while (k > 0 && k * k >= rem) --k;
        while ((k + 1) * (k + 1) < rem) ++k;
        n += 2 * k + 1;
    }
    return n;
}

// Vertices of the level-i dyadic grid (epsilon_i = 2^(1-i)) inside the open
// Euclidean unit disc: integer pairs with j^2 + k^2 < 4^(i-1).
inline long long dyadic_unit_disc_count(int level) {
    if (level < 1 || level > 31) throw std::invalid_argument("level out of range");
    long long r_sq = 1LL << (2 * (level - 1));
    return open_disc_lattice_count(r_sq);
}

inline double dyadic_epsilon(int level) { return std::ldexp(1.0, 1 - level); }

}  // namespace mmg
