#include "swarmer/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

namespace swarmer {

std::string to_string(const Vec3& v) { return fmt::format("({}, {}, {})", v.l, v.h, v.d); }

namespace {

struct Vec3Hash {
    std::size_t operator()(const Vec3& v) const noexcept {
        const std::hash<double> hd;
        std::size_t seed = hd(v.l);
        seed ^= hd(v.h) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        seed ^= hd(v.d) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
        return seed;
    }
};

}  // namespace

PointCloud::PointCloud(std::vector<Vec3> points, int dim) : points_(std::move(points)), dim_(dim) {
    if (points_.empty()) {
        throw GeometryError("empty point cloud");
    }
    if (dim_ != 2 && dim_ != 3) {
        throw GeometryError(fmt::format("unsupported dimension {}", dim_));
    }
    std::unordered_set<Vec3, Vec3Hash> seen;
    seen.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Vec3& p = points_[i];
        if (!p.finite()) {
            throw GeometryError(fmt::format("point {} is not finite", i));
        }
        if (dim_ == 2 && p.d != 0.0) {
            throw GeometryError(fmt::format("point {} has depth {} in a 2D cloud", i, p.d));
        }
        if (!seen.insert(p).second) {
            throw GeometryError(fmt::format("duplicate point {} at index {}", to_string(p), i));
        }
    }
}

PointCloud PointCloud::from_points(std::vector<Vec3> points) {
    const bool planar = std::all_of(points.begin(), points.end(), [](const Vec3& p) { return p.d == 0.0; });
    return PointCloud(std::move(points), planar ? 2 : 3);
}

Vec3 PointCloud::centroid() const { return swarmer::centroid(points_); }

std::pair<Vec3, Vec3> PointCloud::bounding_box() const {
    Vec3 lo = points_.front();
    Vec3 hi = points_.front();
    for (const Vec3& p : points_) {
        lo = {std::min(lo.l, p.l), std::min(lo.h, p.h), std::min(lo.d, p.d)};
        hi = {std::max(hi.l, p.l), std::max(hi.h, p.h), std::max(hi.d, p.d)};
    }
    return {lo, hi};
}

Vec3 centroid(std::span<const Vec3> points) {
    if (points.empty()) {
        throw GeometryError("empty point cloud");
    }
    Vec3 sum;
    for (const Vec3& p : points) {
        sum += p;
    }
    return sum / static_cast<double>(points.size());
}

DeadReckoningModel::DeadReckoningModel(double epsilon_deg, std::uint64_t seed)
    : DeadReckoningModel(epsilon_deg, Rng(seed)) {}

DeadReckoningModel::DeadReckoningModel(double epsilon_deg, Rng rng)
    : epsilon_deg_(epsilon_deg), epsilon_rad_(deg_to_rad(epsilon_deg)), rng_(rng) {
    if (!(epsilon_deg >= 0.0 && epsilon_deg < 180.0)) {
        throw GeometryError(fmt::format("epsilon must be in [0, 180) degrees, got {}", epsilon_deg));
    }
}

Vec3 deviate_flight(const Vec3& start, const Vec3& intended_dest, double deviation_rad, double azimuth_rad,
                    int dim) {
    const Vec3 ideal = intended_dest - start;
    const double length = ideal.norm();
    if (length == 0.0) {
        return start;
    }
    const Vec3 u = ideal / length;
    Vec3 direction;
    if (dim == 2) {
        // Rotation within the L-H plane.
        const double c = std::cos(deviation_rad);
        const double s = std::sin(deviation_rad);
        direction = {u.l * c - u.h * s, u.l * s + u.h * c, 0.0};
    } else {
        // Perpendicular basis around the ideal axis. The H axis seeds the
        // basis unless the flight is nearly vertical, then the L axis does.
        const Vec3 seed_axis = std::abs(u.h) < 0.9 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
        const Vec3 p1 = u.cross(seed_axis) / u.cross(seed_axis).norm();
        const Vec3 p2 = u.cross(p1);
        const Vec3 w = p1 * std::cos(azimuth_rad) + p2 * std::sin(azimuth_rad);
        direction = u * std::cos(deviation_rad) + w * std::sin(deviation_rad);
    }
    return start + direction * length;
}

Vec3 dead_reckon(const Vec3& start, const Vec3& intended_dest, DeadReckoningModel& model, int dim) {
    if (start == intended_dest) {
        return start;
    }
    const double eps = model.epsilon_rad();
    const double deviation = model.rng().uniform(-eps, eps);
    double azimuth = 0.0;
    if (dim == 3) {
        azimuth = model.rng().uniform(0.0, 2.0 * kPi);
    }
    return deviate_flight(start, intended_dest, deviation, azimuth, dim);
}

double chord_bound(double length, double epsilon_rad) { return 2.0 * length * std::sin(epsilon_rad / 2.0); }

namespace {

// Directed max-min squared distance from every point of a to the set b.
// b_sorted holds b ordered by l; the inner search walks outward from the
// insertion point and stops a side once the l gap alone exceeds the best
// candidate, or early once the point cannot raise the running maximum.
double directed_max_min_sq(std::span<const Vec3> a, const std::vector<Vec3>& b_sorted) {
    double running_max = 0.0;
    for (const Vec3& p : a) {
        auto it = std::lower_bound(b_sorted.begin(), b_sorted.end(), p.l,
                                   [](const Vec3& q, double l) { return q.l < l; });
        std::ptrdiff_t hi = it - b_sorted.begin();
        std::ptrdiff_t lo = hi - 1;
        const auto n = static_cast<std::ptrdiff_t>(b_sorted.size());
        double best = std::numeric_limits<double>::infinity();
        bool lo_open = lo >= 0;
        bool hi_open = hi < n;
        while ((lo_open || hi_open) && best > running_max) {
            if (hi_open) {
                const double gap = b_sorted[hi].l - p.l;
                if (gap * gap >= best) {
                    hi_open = false;
                } else {
                    best = std::min(best, distance_squared(p, b_sorted[hi]));
                    hi_open = ++hi < n;
                }
            }
            if (lo_open && best > running_max) {
                const double gap = p.l - b_sorted[lo].l;
                if (gap * gap >= best) {
                    lo_open = false;
                } else {
                    best = std::min(best, distance_squared(p, b_sorted[lo]));
                    lo_open = --lo >= 0;
                }
            }
        }
        running_max = std::max(running_max, best);
    }
    return running_max;
}

std::vector<Vec3> sorted_by_l(std::span<const Vec3> pts) {
    std::vector<Vec3> out(pts.begin(), pts.end());
    std::sort(out.begin(), out.end(), [](const Vec3& x, const Vec3& y) { return x.l < y.l; });
    return out;
}

}  // namespace

double hausdorff_raw(std::span<const Vec3> e, std::span<const Vec3> g) {
    if (e.empty() || g.empty()) {
        throw GeometryError("empty point cloud");
    }
    const double eg = directed_max_min_sq(e, sorted_by_l(g));
    const double ge = directed_max_min_sq(g, sorted_by_l(e));
    return std::sqrt(std::max(eg, ge));
}

double hausdorff_raw(const PointCloud& e, const PointCloud& g) {
    if (e.dim() != g.dim()) {
        throw GeometryError("cloud dimension mismatch");
    }
    return hausdorff_raw(e.points(), g.points());
}

Vec3 translate_centroid(std::span<const Vec3> e, std::span<const Vec3> g) {
    if (e.size() != g.size()) {
        throw GeometryError("cloud size mismatch");
    }
    return centroid(g) - centroid(e);
}

Vec3 translate_stochastic(std::span<const Vec3> e, std::span<const Vec3> g, std::span<const std::size_t> assignment,
                          Rng& rng, std::size_t sample_size) {
    if (e.size() != g.size() || assignment.size() != e.size()) {
        throw GeometryError("cloud size mismatch");
    }
    if (e.empty()) {
        throw GeometryError("empty point cloud");
    }
    std::vector<std::size_t> sample(e.size());
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    if (sample_size < e.size()) {
        // Partial Fisher-Yates: the first sample_size slots become the sample.
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(e.size() - i));
            std::swap(sample[i], sample[j]);
        }
        sample.resize(sample_size);
    }
    Vec3 best_vector;
    double best_residual = std::numeric_limits<double>::infinity();
    std::size_t best_index = std::numeric_limits<std::size_t>::max();
    for (const std::size_t i : sample) {
        const Vec3 candidate = g[assignment[i]] - e[i];
        double residual = 0.0;
        for (const std::size_t j : sample) {
            residual += distance(e[j] + candidate, g[assignment[j]]);
        }
        if (residual < best_residual || (residual == best_residual && i < best_index)) {
            best_residual = residual;
            best_vector = candidate;
            best_index = i;
        }
    }
    return best_vector;
}

double hd_partial(std::span<const Vec3> e_assigned, std::span<const Vec3> g_assigned, std::span<const Vec3> g_full,
                  TranslationMethod method, Rng& rng, std::size_t sample_size) {
    Vec3 shift;
    if (method == TranslationMethod::centroid) {
        shift = translate_centroid(e_assigned, g_assigned);
    } else {
        std::vector<std::size_t> identity(e_assigned.size());
        std::iota(identity.begin(), identity.end(), std::size_t{0});
        shift = translate_stochastic(e_assigned, g_assigned, identity, rng, sample_size);
    }
    std::vector<Vec3> moved(e_assigned.begin(), e_assigned.end());
    for (Vec3& p : moved) {
        p += shift;
    }
    return hausdorff_raw(moved, g_full);
}

double hd(std::span<const Vec3> e, std::span<const Vec3> g, TranslationMethod method, Rng& rng,
          std::size_t sample_size) {
    return hd_partial(e, g, g, method, rng, sample_size);
}

}  // namespace swarmer
