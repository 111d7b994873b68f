#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swarmer/geometry.hpp"
#include "swarmer/rng.hpp"

namespace swarmer {

struct NeighborDistance {
    bool present = true;
    double gt_distance = 0.0;
};

// C = 1 - sum_k min(1/n, R / gt_distance_k); a missing neighbor contributes 1/n.
double confidence(double R, std::span<const NeighborDistance> neighbors);

enum class ConfidenceMode { average, worst };

// Error radius of one dead-reckoned leg: the chord bound (worst) or the mean
// chord over deviations uniform in [0, eps] (average).
double leg_error_radius(double length, double epsilon_rad, ConfidenceMode mode);

enum class SolveFailure {
    none,
    too_few_neighbors,
    centers_too_close,
    degenerate_angle,
    circles_disjoint,
    residual,
};

std::string_view to_string(SolveFailure failure);

struct SolveResult {
    std::optional<Vec3> point;
    SolveFailure failure = SolveFailure::none;

    bool ok() const { return point.has_value(); }
};

using Triple = std::array<Vec3, 3>;

inline constexpr double kMinCenterGap = 1.0;

// Circle-intersection triangulation in the L-H plane: finds the point whose
// angles to the estimated anchors equal the ground-truth angles.
SolveResult triangulate(const Vec3& localizer_gt, const Triple& anchors_est, const Triple& anchors_gt,
                        double min_center_gap = kMinCenterGap);

inline constexpr double kTrilaterationTol = 0.01;

// Finds the point whose distances to the estimated anchors equal the
// ground-truth distances.
SolveResult trilaterate(const Vec3& localizer_gt, const Triple& anchors_est, const Triple& anchors_gt, int dim,
                        double tol = kTrilaterationTol);

enum class BaselineMethod { triangulation, trilateration };

std::string_view to_string(BaselineMethod method);

struct BaselineConfig {
    BaselineMethod method = BaselineMethod::trilateration;
    ConfidenceMode confidence_mode = ConfidenceMode::worst;
    double threshold = 0.9;
    std::size_t max_iters = 0;  // 0: 50 per FLS
    double epsilon_deg = 0.0;
    double trilateration_tol = kTrilaterationTol;
    double min_center_gap = kMinCenterGap;
    std::size_t neighbors_k = 8;
    double neighbor_radius = std::numeric_limits<double>::infinity();
    TranslationMethod translation = TranslationMethod::centroid;
};

struct BaselineIteration {
    std::size_t iteration = 0;
    std::optional<std::size_t> fls;
    SolveFailure failure = SolveFailure::none;
    double min_confidence = 0.0;
    double hd = 0.0;
};

struct BaselineResult {
    std::vector<Vec3> est;
    std::vector<BaselineIteration> trace;  // row 0 is the starting state
    std::size_t iterations = 0;
    std::size_t relocations = 0;
    std::size_t failures = 0;
    std::size_t skipped_fls = 0;  // FLSs with fewer than 3 neighbors
    bool reached_threshold = false;
    double final_hd = 0.0;
};

// gt and est are index-aligned; deploy_legs holds each FLS's deployment
// flight length (for its error radius).
BaselineResult run_baseline(std::span<const Vec3> gt, std::span<const Vec3> est, std::span<const double> deploy_legs,
                            int dim, const BaselineConfig& config, Rng& rng);

// k nearest ground-truth neighbors (ties by lower index) within max_distance.
std::vector<std::vector<std::size_t>> nearest_neighbors(std::span<const Vec3> gt, std::size_t k,
                                                        double max_distance = std::numeric_limits<double>::infinity());

}  // namespace swarmer
