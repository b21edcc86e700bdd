#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmg {

// Exact rational with small components. Used for lattice scales and for
// deciding distance-vs-threshold comparisons without floating-point ties.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        std::int64_t a = num < 0 ? -num : num;
        std::int64_t g = std::gcd(a, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool positive() const { return num > 0; }

    // Accepts "3/4", "0.25", "2".
    static Rational parse(std::string_view s);
};

inline Rational Rational::parse(std::string_view s) {
    auto to_i64 = [](std::string_view t) -> std::int64_t {
        if (t.empty()) throw std::invalid_argument("empty rational component");
        std::size_t pos = 0;
        std::int64_t v = std::stoll(std::string(t), &pos);
        if (pos != t.size()) throw std::invalid_argument("bad rational: " + std::string(t));
        return v;
    };
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        return Rational(to_i64(s.substr(0, slash)), to_i64(s.substr(slash + 1)));
    }
    auto dot = s.find('.');
    if (dot != std::string_view::npos) {
        std::string_view whole = s.substr(0, dot);
        std::string_view frac = s.substr(dot + 1);
        if (frac.size() > 15) throw std::invalid_argument("decimal too long: " + std::string(s));
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        bool neg = !whole.empty() && whole.front() == '-';
        std::int64_t w = whole.empty() || whole == "-" ? 0 : to_i64(whole);
        std::int64_t f = frac.empty() ? 0 : to_i64(frac);
        std::int64_t n = (neg ? -1 : 1) * ((w < 0 ? -w : w) * den + f);
        return Rational(n, den);
    }
    return Rational(to_i64(s), 1);
}

// Result of a distance-vs-threshold comparison.  sign is the sign of
// (distance - threshold); exact means the decision came from integer
// lattice arithmetic, so sign == 0 is true equality.  When !exact,
// sign == 0 means "within relative tolerance 1e-9", resolved by callers
// as inside the threshold region and flagged.
struct DistCmp {
    int sign = 0;
    bool exact = false;
};

namespace detail {

using u128 = unsigned __int128;

inline bool mul_u128(u128 a, u128 b, u128& out) {
    if (a != 0 && b > (std::numeric_limits<u128>::max)() / a) return false;
    out = a * b;
    return true;
}

// sign of (a * 2^e) - b for nonnegative 128-bit a, b.  Saturates on shift
// overflow (the shifted side is then certainly larger).
inline int cmp_shifted(u128 a, int e, u128 b) {
    if (e >= 0) {
        if (a != 0 && (e >= 128 || a > ((std::numeric_limits<u128>::max)() >> e))) return 1;
        a <<= e;
    } else {
        int k = -e;
        if (b != 0 && (k >= 128 || b > ((std::numeric_limits<u128>::max)() >> k))) return -1;
        b <<= k;
    }
    if (a < b) return -1;
    if (a > b) return 1;
    return 0;
}

}  // namespace detail

// Exact sign of sqrt(S) * (num/den) - t for integer squared step count
// S >= 0, positive rational scale num/den, and threshold t (a double, hence
// itself an exact dyadic rational).  Equivalent to comparing S*num^2 and
// t^2*den^2 as exact integers.  Falls back to a long-double comparison with
// a tiny tie window when the integers do not fit in 128 bits.
inline DistCmp compare_lattice_distance(long long steps_sq, const Rational& scale, double t) {
    if (t < 0.0) return {1, true};
    if (!(t == t)) throw std::invalid_argument("NaN threshold");

    using detail::u128;
    const u128 S = static_cast<u128>(steps_sq);
    u128 numsq, lhs;
    bool ok = detail::mul_u128(static_cast<u128>(scale.num), static_cast<u128>(scale.num), numsq) &&
              detail::mul_u128(numsq, S, lhs);

    // t = m * 2^e with m an odd integer (or zero)
    int e2 = 0;
    double f = std::frexp(t, &e2);
    auto m = static_cast<std::uint64_t>(std::ldexp(f, 53));
    int e = e2 - 53;
    while (m != 0 && (m & 1ull) == 0) {
        m >>= 1;
        ++e;
    }

    u128 msq, rhs;
    bool ok2 = detail::mul_u128(static_cast<u128>(m), static_cast<u128>(m), msq) &&
               detail::mul_u128(msq,
                                static_cast<u128>(scale.den) * static_cast<u128>(scale.den), rhs);

    if (ok && ok2) {
        // lhs vs rhs * 2^(2e)
        int s = -detail::cmp_shifted(rhs, 2 * e, lhs);
        return {s, true};
    }

    // out-of-range fallback: long-double comparison, near-equality is a tie
    long double l = static_cast<long double>(steps_sq) * scale.num * scale.num;
    long double r = static_cast<long double>(t) * t * scale.den * scale.den;
    long double gap = l - r;
    long double mag = std::max<long double>(1.0L, std::max(l, r));
    if (std::fabs(gap) <= 1e-18L * mag) return {0, false};
    return {gap < 0 ? -1 : 1, false};
}

// Tolerance comparison for spaces without exact arithmetic: relative 1e-9.
inline DistCmp compare_float_distance(double d, double t) {
    double tol = 1e-9 * std::max(1.0, std::fabs(t));
    if (std::fabs(d - t) <= tol) return {0, false};
    return {d < t ? -1 : 1, false};
}

}  // namespace mmg
