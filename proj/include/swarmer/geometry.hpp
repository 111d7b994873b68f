#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmer/rng.hpp"

namespace swarmer {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A position or displacement in display cells on the Length, Height and
// Depth axes. 2D clouds keep d == 0.
struct Vec3 {
    double l = 0.0;
    double h = 0.0;
    double d = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double l_, double h_, double d_ = 0.0) : l(l_), h(h_), d(d_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {l + o.l, h + o.h, d + o.d}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {l - o.l, h - o.h, d - o.d}; }
    constexpr Vec3 operator-() const { return {-l, -h, -d}; }
    constexpr Vec3 operator*(double s) const { return {l * s, h * s, d * s}; }
    constexpr Vec3 operator/(double s) const { return {l / s, h / s, d / s}; }
    Vec3& operator+=(const Vec3& o) {
        l += o.l;
        h += o.h;
        d += o.d;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        l -= o.l;
        h -= o.h;
        d -= o.d;
        return *this;
    }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double dot(const Vec3& o) const { return l * o.l + h * o.h + d * o.d; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {h * o.d - d * o.h, d * o.l - l * o.d, l * o.h - h * o.l};
    }
    constexpr double norm_squared() const { return l * l + h * h + d * d; }
    double norm() const { return std::sqrt(norm_squared()); }
    bool finite() const { return std::isfinite(l) && std::isfinite(h) && std::isfinite(d); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline double distance_squared(const Vec3& a, const Vec3& b) {
    const double dl = a.l - b.l;
    const double dh = a.h - b.h;
    const double dd = a.d - b.d;
    return dl * dl + dh * dh + dd * dd;
}

std::string to_string(const Vec3& v);

// An ordered, duplicate-free set of points. dim == 2 implies every d == 0.
class PointCloud {
public:
    // Throws GeometryError on empty input, non-finite coordinates, duplicates,
    // or a 2D cloud with non-zero depth.
    PointCloud(std::vector<Vec3> points, int dim);

    // Infers the dimension: 2 when every point has d == 0, otherwise 3.
    static PointCloud from_points(std::vector<Vec3> points);

    std::span<const Vec3> points() const { return points_; }
    const Vec3& operator[](std::size_t i) const { return points_[i]; }
    std::size_t size() const { return points_.size(); }
    int dim() const { return dim_; }

    Vec3 centroid() const;
    // Component-wise minimum and maximum corners.
    std::pair<Vec3, Vec3> bounding_box() const;

private:
    std::vector<Vec3> points_;
    int dim_;
};

Vec3 centroid(std::span<const Vec3> points);

// Dead-reckoning error model: every flight deviates from its ideal
// direction by an angle drawn uniformly from [-epsilon, +epsilon].
class DeadReckoningModel {
public:
    DeadReckoningModel(double epsilon_deg, std::uint64_t seed);
    DeadReckoningModel(double epsilon_deg, Rng rng);

    double epsilon_deg() const { return epsilon_deg_; }
    double epsilon_rad() const { return epsilon_rad_; }
    Rng& rng() { return rng_; }

private:
    double epsilon_deg_;
    double epsilon_rad_;
    Rng rng_;
};

// Flies from start toward intended_dest with the given deviation angle
// (radians) and, in 3D, the azimuth of the deviation plane about the ideal
// axis. The returned endpoint is at exactly |intended_dest - start| from start.
Vec3 deviate_flight(const Vec3& start, const Vec3& intended_dest, double deviation_rad,
                    double azimuth_rad, int dim);

// Draws the deviation from the model and returns the actual endpoint.
// Zero-length travel returns start without consuming any draw.
Vec3 dead_reckon(const Vec3& start, const Vec3& intended_dest, DeadReckoningModel& model, int dim);

// Largest endpoint error a flight of the given length can incur.
double chord_bound(double length, double epsilon_rad);

// Max over both directed max-min distance sets between the two clouds.
double hausdorff_raw(std::span<const Vec3> e, std::span<const Vec3> g);
double hausdorff_raw(const PointCloud& e, const PointCloud& g);

enum class TranslationMethod { centroid, stochastic };

// Translation that moves the centroid of e onto the centroid of g.
Vec3 translate_centroid(std::span<const Vec3> e, std::span<const Vec3> g);

inline constexpr std::size_t kStochasticSampleSize = 90;

// Samples up to sample_size points of e, tries each sampled point's
// translation onto its assigned g point, and returns the candidate with the
// least summed residual over the sample. Ties go to the lowest e index.
// assignment[i] is the g index assigned to e[i].
Vec3 translate_stochastic(std::span<const Vec3> e, std::span<const Vec3> g,
                          std::span<const std::size_t> assignment, Rng& rng,
                          std::size_t sample_size = kStochasticSampleSize);

// Translation-corrected Hausdorff distance. e_assigned and g_assigned are the
// paired points used to compute the translation; g_full is the cloud the
// translated e is measured against (it may contain points with no live
// counterpart in e).
double hd(std::span<const Vec3> e, std::span<const Vec3> g, TranslationMethod method, Rng& rng,
          std::size_t sample_size = kStochasticSampleSize);
double hd_partial(std::span<const Vec3> e_assigned, std::span<const Vec3> g_assigned,
                  std::span<const Vec3> g_full, TranslationMethod method, Rng& rng,
                  std::size_t sample_size = kStochasticSampleSize);

inline constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace swarmer
