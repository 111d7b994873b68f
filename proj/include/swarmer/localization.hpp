#pragma once

#include <optional>
#include <string_view>

#include "swarmer/geometry.hpp"
#include "swarmer/rng.hpp"

namespace swarmer {

// Optional perturbation of a measured displacement. Zero means ideal sensing.
struct MeasurementNoise {
    double distance_rel_error = 0.0;
    double angle_error_deg = 0.0;

    bool active() const { return distance_rel_error > 0.0 || angle_error_deg > 0.0; }
    void validate() const;
};

// Measured displacement from localizer to anchor in estimated truth.
Vec3 measure_displacement(const Vec3& localizer_est, const Vec3& anchor_est, const MeasurementNoise& noise, Rng& rng,
                          int dim);

// V = d - D: the move that gives the localizer its ground-truth offset to
// the anchor.
Vec3 ss_localize(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt, const Vec3& anchor_gt,
                 const MeasurementNoise& noise, Rng& rng, int dim);

inline constexpr double kDefaultStandoff = 1.0;

// Point at standoff from the anchor, on the anchor's side facing the
// localizer, that a physical-movement localizer flies to first.
Vec3 pm_approach_point(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                       const Vec3& anchor_gt, double standoff);

struct PmResult {
    Vec3 intermediate;         // actual end of the approach leg
    double approach_distance;  // length of the approach leg
    Vec3 vector;               // correction applied from intermediate
};

// Flies the approach leg with dead reckoning, then measures from there.
PmResult pm_localize(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                     const Vec3& anchor_gt, DeadReckoningModel& model, double standoff, int dim,
                     const MeasurementNoise& noise, Rng& rng);

enum class LocalizerKind { ss, pm };

std::string_view to_string(LocalizerKind kind);
std::optional<LocalizerKind> parse_localizer(std::string_view text);

// What a localization step asks of the localizer's motion.
struct LocalizationPlan {
    std::optional<Vec3> approach_end;  // PM only
    double approach_distance = 0.0;
    Vec3 vector;      // final correction leg
    Vec3 net_vector;  // approach displacement plus correction; what the swarm follows
};

struct Localizer {
    LocalizerKind kind = LocalizerKind::ss;
    double standoff = kDefaultStandoff;
    MeasurementNoise noise;

    LocalizationPlan plan(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                          const Vec3& anchor_gt, DeadReckoningModel& model, int dim, Rng& rng) const;
};

}  // namespace swarmer
