#pragma once

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <mmg/rational.hpp>

namespace mmg {

enum class DistanceKind { euclidean, explicit_matrix };
enum class MeasureKind { lebesgue_analytic, empirical_counting, empirical_weighted };

inline const char* to_string(DistanceKind k) {
    return k == DistanceKind::euclidean ? "euclidean" : "explicit-matrix";
}
inline const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::lebesgue_analytic: return "lebesgue-analytic";
        case MeasureKind::empirical_counting: return "empirical-counting";
        default: return "empirical-weighted";
    }
}

// A metric ball request.  Membership is always strict: d < radius.
struct BallSpec {
    int center = 0;
    double radius = 0.0;
};

// A finite sample of a metric measure space with exact distance comparison
// and ball-measure evaluation.  Immutable after construction.
class SampledSpace {
public:
    static SampledSpace make_euclidean_lattice(int dimension, Rational scale, long extent);
    static SampledSpace sierpinski_prefractal(int level);
    static SampledSpace load_point_cloud(const std::string& path, MeasureKind kind);
    static SampledSpace from_points(std::vector<std::vector<double>> pts, MeasureKind kind,
                                    std::vector<double> weights = {},
                                    std::string label = "points");
    static SampledSpace from_distance_matrix(std::vector<std::vector<double>> dist,
                                             std::vector<double> weights = {},
                                             std::string label = "matrix");

    int dimension() const { return dim_; }
    int size() const { return n_; }
    DistanceKind distance_kind() const { return dist_kind_; }
    MeasureKind measure_kind() const { return measure_kind_; }
    const std::optional<Rational>& lattice_scale() const { return lattice_scale_; }
    std::optional<double> quasiconvexity_L() const { return quasiconvexity_L_; }
    const std::string& label() const { return label_; }

    std::span<const double> point(int i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }

    double distance(int i, int j) const {
        if (dist_kind_ == DistanceKind::explicit_matrix) {
            return matrix_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                           static_cast<std::size_t>(j)];
        }
        return euclid(point(i), point(j));
    }

    // Euclidean distance from sample point i to an arbitrary coordinate.
    double distance_to(int i, std::span<const double> x) const {
        require_euclidean("distance_to");
        return euclid(point(i), x);
    }

    // Exact squared step count S with d(i,j)^2 = scale^2 * S, when the
    // space is a lattice sample.
    std::optional<long long> lattice_sq_steps(int i, int j) const {
        if (!lattice_scale_) return std::nullopt;
        long long s = 0;
        const auto* a = lattice_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim_);
        const auto* b = lattice_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_);
        for (int k = 0; k < dim_; ++k) {
            long long d = a[k] - b[k];
            s += d * d;
        }
        return s;
    }

    // Sign of d(i,j) - threshold.  Exact on lattice samples; otherwise a
    // relative-1e-9 tolerance comparison whose ties callers resolve as
    // "inside" and flag.
    DistCmp compare_distance(int i, int j, double threshold) const {
        if (auto s = lattice_sq_steps(i, j)) {
            return compare_lattice_distance(*s, *lattice_scale_, threshold);
        }
        return compare_float_distance(distance(i, j), threshold);
    }

    // Strict ball membership d(i, center) < r under the comparison policy.
    bool ball_contains(int center, int i, double r, bool* tie = nullptr) const {
        DistCmp c = compare_distance(i, center, r);
        if (tie) *tie = (c.sign == 0 && !c.exact);
        if (c.exact) return c.sign < 0;
        return c.sign <= 0;
    }

    double point_weight(int i) const {
        if (measure_kind_ == MeasureKind::lebesgue_analytic) {
            throw std::logic_error("analytic measure has no per-point weights");
        }
        return weights_[static_cast<std::size_t>(i)];
    }

    double ball_measure(const BallSpec& ball) const {
        if (ball.center < 0 || ball.center >= n_) {
            throw std::invalid_argument("ball center out of range");
        }
        if (!(ball.radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
        if (measure_kind_ == MeasureKind::lebesgue_analytic) {
            if (!lattice_scale_) {
                throw std::invalid_argument(
                    "analytic Lebesgue measure is only available on full-space lattice "
                    "samples; use an empirical measure");
            }
            return analytic_ball_volume(dim_, ball.radius);
        }
        double total = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (ball_contains(ball.center, i, ball.radius)) {
                total += weights_[static_cast<std::size_t>(i)];
            }
        }
        return total;
    }

    static double analytic_ball_volume(int dim, double r) {
        switch (dim) {
            case 1: return 2.0 * r;
            case 2: return std::numbers::pi * r * r;
            case 3: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
            default: throw std::invalid_argument("analytic volume implemented for dim 1..3");
        }
    }

    std::pair<std::vector<double>, std::vector<double>> bounding_box() const {
        std::vector<double> lo(static_cast<std::size_t>(dim_),
                               std::numeric_limits<double>::infinity());
        std::vector<double> hi(static_cast<std::size_t>(dim_),
                               -std::numeric_limits<double>::infinity());
        for (int i = 0; i < n_; ++i) {
            auto p = point(i);
            for (int k = 0; k < dim_; ++k) {
                std::size_t ks = static_cast<std::size_t>(k);
                lo[ks] = std::min(lo[ks], p[ks]);
                hi[ks] = std::max(hi[ks], p[ks]);
            }
        }
        return {lo, hi};
    }

    // Distance from point i to the boundary of the sample's bounding box;
    // +inf when the space has no coordinates.
    double boundary_margin(int i) const {
        if (dist_kind_ != DistanceKind::euclidean) {
            return std::numeric_limits<double>::infinity();
        }
        auto p = point(i);
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < dim_; ++k) {
            std::size_t ks = static_cast<std::size_t>(k);
            m = std::min(m, std::min(p[ks] - bbox_lo_[ks], bbox_hi_[ks] - p[ks]));
        }
        return m;
    }

private:
    SampledSpace() = default;

    void require_euclidean(const char* what) const {
        if (dist_kind_ != DistanceKind::euclidean) {
            throw std::logic_error(std::string(what) + " requires a Euclidean space");
        }
    }

    static double euclid(std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            double d = a[k] - b[k];
            s += d * d;
        }
        return std::sqrt(s);
    }

    void finalize_weights(MeasureKind kind, std::vector<double> w) {
        measure_kind_ = kind;
        if (kind == MeasureKind::lebesgue_analytic) return;
        if (kind == MeasureKind::empirical_counting) {
            weights_.assign(static_cast<std::size_t>(n_), n_ > 0 ? 1.0 / n_ : 0.0);
            return;
        }
        if (static_cast<int>(w.size()) != n_) {
            throw std::invalid_argument("weighted measure needs one weight per point");
        }
        double total = 0.0;
        for (double x : w) {
            if (!(x > 0.0)) throw std::invalid_argument("weights must be positive");
            total += x;
        }
        for (double& x : w) x /= total;
        weights_ = std::move(w);
    }

    void cache_bbox() {
        if (dist_kind_ == DistanceKind::euclidean && n_ > 0) {
            auto [lo, hi] = bounding_box();
            bbox_lo_ = std::move(lo);
            bbox_hi_ = std::move(hi);
        } else {
            bbox_lo_.assign(static_cast<std::size_t>(dim_), 0.0);
            bbox_hi_.assign(static_cast<std::size_t>(dim_), 0.0);
        }
    }

    int dim_ = 0;
    int n_ = 0;
    DistanceKind dist_kind_ = DistanceKind::euclidean;
    MeasureKind measure_kind_ = MeasureKind::empirical_counting;
    std::optional<Rational> lattice_scale_;
    std::optional<double> quasiconvexity_L_;
    std::string label_;
    std::vector<double> coords_;       // n * dim, row-major
    std::vector<long long> lattice_;   // exact integer coordinates when lattice
    std::vector<double> weights_;      // normalized, empirical kinds only
    std::vector<double> matrix_;       // n * n, explicit-matrix kind only
    std::vector<double> bbox_lo_, bbox_hi_;
};

inline SampledSpace SampledSpace::make_euclidean_lattice(int dimension, Rational scale,
                                                         long extent) {
    if (dimension < 1 || dimension > 3) {
        throw std::invalid_argument("lattice dimension must be 1, 2, or 3");
    }
    if (!scale.positive()) throw std::invalid_argument("lattice scale must be positive");
    if (extent < 1) throw std::invalid_argument("lattice extent must be >= 1");

    SampledSpace s;
    s.dim_ = dimension;
    s.dist_kind_ = DistanceKind::euclidean;
    s.lattice_scale_ = scale;
    s.quasiconvexity_L_ = 1.0;
    const long side = 2 * extent + 1;
    long long count = 1;
    for (int k = 0; k < dimension; ++k) count *= side;
    if (count > 40'000'000LL) throw std::invalid_argument("lattice too large");
    s.n_ = static_cast<int>(count);
    s.coords_.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(dimension));
    s.lattice_.reserve(s.coords_.capacity());
    const double q = scale.value();
    std::vector<long> idx(static_cast<std::size_t>(dimension), -extent);
    while (true) {
        for (int k = 0; k < dimension; ++k) {
            long long step = idx[static_cast<std::size_t>(k)];
            s.lattice_.push_back(step);
            s.coords_.push_back(static_cast<double>(step) * q);
        }
        int k = 0;
        for (; k < dimension; ++k) {
            std::size_t ks = static_cast<std::size_t>(k);
            if (++idx[ks] <= extent) break;
            idx[ks] = -extent;
        }
        if (k == dimension) break;
    }
    s.finalize_weights(MeasureKind::lebesgue_analytic, {});
    std::ostringstream lbl;
    lbl << "lattice-d" << dimension << "-q" << scale.num << "/" << scale.den << "-ext" << extent;
    s.label_ = lbl.str();
    s.cache_bbox();
    return s;
}

inline SampledSpace SampledSpace::sierpinski_prefractal(int level) {
    if (level < 1 || level > 10) {
        throw std::invalid_argument("sierpinski level must be in [1, 10]");
    }
    // integer barycentric pairs (i, j): point = s*(i + j/2, j*sqrt(3)/2),
    // s = 2^-level; corner triangle spans i + j <= 2^level
    std::vector<std::pair<long, long>> verts;
    const long side = 1L << level;
    struct Tri {
        long ax, ay, bx, by, cx, cy;
    };
    std::vector<Tri> stack{{0, 0, side, 0, 0, side}};
    while (!stack.empty()) {
        Tri t = stack.back();
        stack.pop_back();
        long span = t.bx - t.ax + (t.by - t.ay);  // side length in lattice units
        if (span <= 1) {
            verts.emplace_back(t.ax, t.ay);
            verts.emplace_back(t.bx, t.by);
            verts.emplace_back(t.cx, t.cy);
            continue;
        }
        long mabx = (t.ax + t.bx) / 2, maby = (t.ay + t.by) / 2;
        long mbcx = (t.bx + t.cx) / 2, mbcy = (t.by + t.cy) / 2;
        long mcax = (t.cx + t.ax) / 2, mcay = (t.cy + t.ay) / 2;
        stack.push_back({t.ax, t.ay, mabx, maby, mcax, mcay});
        stack.push_back({mabx, maby, t.bx, t.by, mbcx, mbcy});
        stack.push_back({mcax, mcay, mbcx, mbcy, t.cx, t.cy});
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

    std::vector<std::vector<double>> pts;
    pts.reserve(verts.size());
    const double s = 1.0 / static_cast<double>(side);
    const double half_sqrt3 = std::sqrt(3.0) / 2.0;
    for (auto [i, j] : verts) {
        pts.push_back({s * (static_cast<double>(i) + 0.5 * static_cast<double>(j)),
                       s * static_cast<double>(j) * half_sqrt3});
    }
    SampledSpace out = from_points(std::move(pts), MeasureKind::empirical_counting, {},
                                   "sierpinski-" + std::to_string(level));
    return out;
}

inline SampledSpace SampledSpace::from_points(std::vector<std::vector<double>> pts,
                                              MeasureKind kind, std::vector<double> weights,
                                              std::string label) {
    SampledSpace s;
    s.n_ = static_cast<int>(pts.size());
    s.dim_ = s.n_ > 0 ? static_cast<int>(pts.front().size()) : 0;
    if (kind == MeasureKind::lebesgue_analytic) {
        throw std::invalid_argument(
            "analytic measure requires a generated full-space lattice sample");
    }
    s.dist_kind_ = DistanceKind::euclidean;
    s.coords_.reserve(static_cast<std::size_t>(s.n_) * static_cast<std::size_t>(s.dim_));
    for (const auto& p : pts) {
        if (static_cast<int>(p.size()) != s.dim_) {
            throw std::invalid_argument("inconsistent point dimension");
        }
        for (double v : p) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
            s.coords_.push_back(v);
        }
    }
    s.finalize_weights(kind, std::move(weights));
    s.label_ = std::move(label);
    s.cache_bbox();
    return s;
}

inline SampledSpace SampledSpace::from_distance_matrix(std::vector<std::vector<double>> dist,
                                                       std::vector<double> weights,
                                                       std::string label) {
    SampledSpace s;
    s.n_ = static_cast<int>(dist.size());
    s.dim_ = 0;
    s.dist_kind_ = DistanceKind::explicit_matrix;
    s.matrix_.assign(static_cast<std::size_t>(s.n_) * static_cast<std::size_t>(s.n_), 0.0);
    for (int i = 0; i < s.n_; ++i) {
        if (static_cast<int>(dist[static_cast<std::size_t>(i)].size()) != s.n_) {
            throw std::invalid_argument("distance matrix must be square");
        }
        for (int j = 0; j < s.n_; ++j) {
            double v = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("distances must be finite and nonnegative");
            }
            if (i == j && v != 0.0) throw std::invalid_argument("nonzero diagonal distance");
            if (i != j && v == 0.0) throw std::invalid_argument("duplicate point");
            s.matrix_[static_cast<std::size_t>(i) * static_cast<std::size_t>(s.n_) +
                      static_cast<std::size_t>(j)] = v;
        }
    }
    for (int i = 0; i < s.n_; ++i) {
        for (int j = i + 1; j < s.n_; ++j) {
            if (s.matrix_[static_cast<std::size_t>(i) * static_cast<std::size_t>(s.n_) +
                          static_cast<std::size_t>(j)] !=
                s.matrix_[static_cast<std::size_t>(j) * static_cast<std::size_t>(s.n_) +
                          static_cast<std::size_t>(i)]) {
                throw std::invalid_argument("distance matrix must be symmetric");
            }
        }
    }
    s.finalize_weights(weights.empty() ? MeasureKind::empirical_counting
                                       : MeasureKind::empirical_weighted,
                       std::move(weights));
    s.label_ = std::move(label);
    s.cache_bbox();
    return s;
}

inline SampledSpace SampledSpace::load_point_cloud(const std::string& path, MeasureKind kind) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open point cloud file: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> weights;
    std::string line;
    long lineno = 0;
    bool header_allowed = true;
    const bool weighted = kind == MeasureKind::empirical_weighted;

    auto parse_fields = [](const std::string& text, std::vector<double>& out) -> bool {
        out.clear();
        std::size_t i = 0;
        const std::size_t n = text.size();
        while (i < n) {
            std::size_t j = i;
            while (j < n && text[j] != ',') ++j;
            std::size_t a = i, b = j;
            while (a < b && (text[a] == ' ' || text[a] == '\t')) ++a;
            while (b > a && (text[b - 1] == ' ' || text[b - 1] == '\t' || text[b - 1] == '\r')) --b;
            if (a == b) return false;
            double v = 0.0;
            auto res = std::from_chars(text.data() + a, text.data() + b, v);
            if (res.ec != std::errc() || res.ptr != text.data() + b) return false;
            out.push_back(v);
            i = j + 1;
            if (j == n) break;
        }
        return !out.empty();
    };

    std::vector<double> fields;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        if (!parse_fields(line, fields)) {
            if (header_allowed) {
                header_allowed = false;  // non-numeric first row is a header
                continue;
            }
            throw std::invalid_argument("parse error at line " + std::to_string(lineno));
        }
        header_allowed = false;
        if (weighted) {
            if (fields.size() < 2) {
                throw std::invalid_argument("weighted row needs coordinates and a weight at line " +
                                            std::to_string(lineno));
            }
            weights.push_back(fields.back());
            fields.pop_back();
        }
        if (!rows.empty() && fields.size() != rows.front().size()) {
            throw std::invalid_argument("inconsistent column count at line " +
                                        std::to_string(lineno));
        }
        rows.push_back(fields);
    }
    if (rows.empty()) throw std::invalid_argument("empty point cloud: " + path);

    // reject exact duplicates: distance zero between distinct indices
    std::vector<int> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return rows[static_cast<std::size_t>(a)] < rows[static_cast<std::size_t>(b)];
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (rows[static_cast<std::size_t>(order[i])] ==
            rows[static_cast<std::size_t>(order[i - 1])]) {
            throw std::invalid_argument("duplicate point");
        }
    }

    return from_points(std::move(rows),
                       weighted ? MeasureKind::empirical_weighted
                                : MeasureKind::empirical_counting,
                       std::move(weights), path);
}

}  // namespace mmg
