#include "swarmer/localization.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace swarmer {

void MeasurementNoise::validate() const {
    if (!(distance_rel_error >= 0.0) || !(angle_error_deg >= 0.0)) {
        throw std::invalid_argument("measurement noise must be non-negative");
    }
}

Vec3 measure_displacement(const Vec3& localizer_est, const Vec3& anchor_est, const MeasurementNoise& noise, Rng& rng,
                          int dim) {
    const Vec3 d = anchor_est - localizer_est;
    if (!noise.active() || d == Vec3{}) {
        return d;
    }
    const double scale = 1.0 + rng.uniform(-noise.distance_rel_error, noise.distance_rel_error);
    const double eps = deg_to_rad(noise.angle_error_deg);
    const double dev = rng.uniform(-eps, eps);
    const double azimuth = dim == 3 ? rng.uniform(0.0, 2.0 * kPi) : 0.0;
    return deviate_flight(Vec3{}, d, dev, azimuth, dim) * scale;
}

Vec3 ss_localize(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt, const Vec3& anchor_gt,
                 const MeasurementNoise& noise, Rng& rng, int dim) {
    const Vec3 d = measure_displacement(localizer_est, anchor_est, noise, rng, dim);
    const Vec3 D = anchor_gt - localizer_gt;
    return d - D;
}

Vec3 pm_approach_point(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                       const Vec3& anchor_gt, double standoff) {
    Vec3 away = localizer_est - anchor_est;
    if (away.norm() == 0.0) {
        away = localizer_gt - anchor_gt;
    }
    if (away.norm() == 0.0) {
        away = {1.0, 0.0, 0.0};
    }
    return anchor_est + away / away.norm() * standoff;
}

PmResult pm_localize(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                     const Vec3& anchor_gt, DeadReckoningModel& model, double standoff, int dim,
                     const MeasurementNoise& noise, Rng& rng) {
    const Vec3 target = pm_approach_point(localizer_est, anchor_est, localizer_gt, anchor_gt, standoff);
    PmResult out;
    out.intermediate = dead_reckon(localizer_est, target, model, dim);
    out.approach_distance = distance(localizer_est, out.intermediate);
    out.vector = ss_localize(out.intermediate, anchor_est, localizer_gt, anchor_gt, noise, rng, dim);
    return out;
}

std::string_view to_string(LocalizerKind kind) { return kind == LocalizerKind::ss ? "ss" : "pm"; }

std::optional<LocalizerKind> parse_localizer(std::string_view text) {
    if (text == "ss") {
        return LocalizerKind::ss;
    }
    if (text == "pm") {
        return LocalizerKind::pm;
    }
    return std::nullopt;
}

LocalizationPlan Localizer::plan(const Vec3& localizer_est, const Vec3& anchor_est, const Vec3& localizer_gt,
                                 const Vec3& anchor_gt, DeadReckoningModel& model, int dim, Rng& rng) const {
    LocalizationPlan p;
    if (kind == LocalizerKind::ss) {
        p.vector = ss_localize(localizer_est, anchor_est, localizer_gt, anchor_gt, noise, rng, dim);
        p.net_vector = p.vector;
        return p;
    }
    const PmResult pm = pm_localize(localizer_est, anchor_est, localizer_gt, anchor_gt, model, standoff, dim, noise, rng);
    p.approach_end = pm.intermediate;
    p.approach_distance = pm.approach_distance;
    p.vector = pm.vector;
    p.net_vector = (pm.intermediate - localizer_est) + pm.vector;
    return p;
}

}  // namespace swarmer
