#include "swarmer/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace swarmer {

double confidence(double R, std::span<const NeighborDistance> neighbors) {
    if (neighbors.empty()) {
        return 0.0;
    }
    const double share = 1.0 / static_cast<double>(neighbors.size());
    double sum = 0.0;
    for (const NeighborDistance& n : neighbors) {
        sum += n.present ? std::min(share, R / n.gt_distance) : share;
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

double leg_error_radius(double length, double epsilon_rad, ConfidenceMode mode) {
    if (epsilon_rad <= 0.0 || length <= 0.0) {
        return 0.0;
    }
    if (mode == ConfidenceMode::worst) {
        return chord_bound(length, epsilon_rad);
    }
    // Mean of 2 L sin(x / 2) for x uniform in [0, eps].
    return 4.0 * length * (1.0 - std::cos(epsilon_rad / 2.0)) / epsilon_rad;
}

std::string_view to_string(SolveFailure failure) {
    switch (failure) {
        case SolveFailure::none:
            return "none";
        case SolveFailure::too_few_neighbors:
            return "too_few_neighbors";
        case SolveFailure::centers_too_close:
            return "centers_too_close";
        case SolveFailure::degenerate_angle:
            return "degenerate_angle";
        case SolveFailure::circles_disjoint:
            return "circles_disjoint";
        case SolveFailure::residual:
            return "residual";
    }
    return "?";
}

std::string_view to_string(BaselineMethod method) {
    return method == BaselineMethod::triangulation ? "triangulation" : "trilateration";
}

namespace {

SolveResult fail(SolveFailure f) { return {std::nullopt, f}; }

double cross2(const Vec3& a, const Vec3& b) { return a.l * b.h - a.h * b.l; }

// Signed angle at x from (p1 - x) to (p2 - x), in the L-H plane.
double subtended(const Vec3& x, const Vec3& p1, const Vec3& p2) {
    const Vec3 a = p1 - x;
    const Vec3 b = p2 - x;
    return std::atan2(cross2(a, b), a.l * b.l + a.h * b.h);
}

// Center of the circle through p1, p2 on which the chord p1p2 subtends the
// signed inscribed angle theta.
std::optional<Vec3> inscribed_center(const Vec3& p1, const Vec3& p2, double theta) {
    const Vec3 chord = p2 - p1;
    const double c = std::hypot(chord.l, chord.h);
    const double t = std::tan(theta);
    if (c == 0.0 || std::abs(std::sin(theta)) < 1e-9 || !std::isfinite(t)) {
        return std::nullopt;
    }
    const Vec3 left{-chord.h / c, chord.l / c, 0.0};
    return (p1 + p2) * 0.5 + left * (c / (2.0 * t));
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

SolveResult triangulate(const Vec3& localizer_gt, const Triple& anchors_est, const Triple& anchors_gt,
                        double min_center_gap) {
    const double a12 = subtended(localizer_gt, anchors_gt[0], anchors_gt[1]);
    const double a23 = subtended(localizer_gt, anchors_gt[1], anchors_gt[2]);
    const auto c1 = inscribed_center(anchors_est[0], anchors_est[1], a12);
    const auto c2 = inscribed_center(anchors_est[1], anchors_est[2], a23);
    if (!c1 || !c2) {
        return fail(SolveFailure::degenerate_angle);
    }
    const Vec3 axis = *c2 - *c1;
    const double gap = std::hypot(axis.l, axis.h);
    if (gap < min_center_gap) {
        return fail(SolveFailure::centers_too_close);
    }
    // Both circles pass through anchor 2; the other intersection is its
    // mirror image across the line of centers.
    const Vec3 u = axis / gap;
    const Vec3 r = anchors_est[1] - *c1;
    const Vec3 along = u * (r.l * u.l + r.h * u.h);
    const Vec3 y = *c1 + along * 2.0 - r;
    const double scale = std::max({1.0, r.norm(), gap});
    if (distance(y, anchors_est[1]) < 1e-9 * scale) {
        return fail(SolveFailure::circles_disjoint);
    }
    const Vec3 point{y.l, y.h, 0.0};
    if (std::abs(wrap_angle(subtended(point, anchors_est[0], anchors_est[1]) - a12)) > 1e-6 ||
        std::abs(wrap_angle(subtended(point, anchors_est[1], anchors_est[2]) - a23)) > 1e-6) {
        return fail(SolveFailure::residual);
    }
    return {point, SolveFailure::none};
}

SolveResult trilaterate(const Vec3& localizer_gt, const Triple& anchors_est, const Triple& anchors_gt, int dim,
                        double tol) {
    const double D1 = distance(localizer_gt, anchors_gt[0]);
    const double D2 = distance(localizer_gt, anchors_gt[1]);
    const double D3 = distance(localizer_gt, anchors_gt[2]);
    const Vec3& e1 = anchors_est[0];
    const Vec3 span12 = anchors_est[1] - e1;
    const double c = span12.norm();
    if (c < 1e-12) {
        return fail(SolveFailure::centers_too_close);
    }
    const Vec3 ex = span12 / c;
    const double a = (D1 * D1 - D2 * D2 + c * c) / (2.0 * c);
    double h2 = D1 * D1 - a * a;
    if (h2 < 0.0) {
        if (h2 < -1e-9 * std::max(1.0, D1 * D1)) {
            return fail(SolveFailure::circles_disjoint);
        }
        h2 = 0.0;
    }
    const double rho = std::sqrt(h2);
    const Vec3 center = e1 + ex * a;
    const Vec3 q = anchors_est[2] - e1;
    const double q_along = q.dot(ex);
    const Vec3 q_perp = q - ex * q_along;
    const double q_off = q_perp.norm();
    if (q_off < 1e-9 * std::max(1.0, q.norm())) {
        return fail(SolveFailure::degenerate_angle);  // collinear anchors
    }
    const Vec3 u1 = q_perp / q_off;
    Vec3 best;
    if (dim == 2) {
        const Vec3 up{-ex.h, ex.l, 0.0};
        const Vec3 p_plus = center + up * rho;
        const Vec3 p_minus = center - up * rho;
        best = std::abs(distance(p_plus, anchors_est[2]) - D3) <= std::abs(distance(p_minus, anchors_est[2]) - D3)
                   ? p_plus
                   : p_minus;
        best.d = 0.0;
    } else {
        // Points of the circle: center + rho (cos t u1 + sin t u2). Distance to
        // anchor 3 depends on cos t only; the sign of sin t picks the mirror
        // side, matched to the ground-truth chirality.
        const Vec3 u2 = ex.cross(u1);
        Vec3 gt_normal = (anchors_gt[1] - anchors_gt[0]).cross(anchors_gt[2] - anchors_gt[0]);
        const double chirality = (localizer_gt - anchors_gt[0]).dot(gt_normal);
        double cos_t = 1.0;
        if (rho > 0.0) {
            const double along = q_along - a;
            cos_t = (along * along + rho * rho + q_off * q_off - D3 * D3) / (2.0 * rho * q_off);
            cos_t = std::clamp(cos_t, -1.0, 1.0);
        }
        double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        if (chirality < 0.0) {
            sin_t = -sin_t;
        }
        best = center + (u1 * cos_t + u2 * sin_t) * rho;
    }
    if (std::abs(distance(best, anchors_est[2]) - D3) > tol) {
        return fail(SolveFailure::residual);
    }
    return {best, SolveFailure::none};
}

std::vector<std::vector<std::size_t>> nearest_neighbors(std::span<const Vec3> gt, std::size_t k, double max_distance) {
    std::vector<std::vector<std::size_t>> out(gt.size());
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        order.clear();
        for (std::size_t j = 0; j < gt.size(); ++j) {
            if (j == i) {
                continue;
            }
            const double dist = distance(gt[i], gt[j]);
            if (dist <= max_distance) {
                order.emplace_back(dist, j);
            }
        }
        const std::size_t take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
        for (std::size_t t = 0; t < take; ++t) {
            out[i].push_back(order[t].second);
        }
    }
    return out;
}

BaselineResult run_baseline(std::span<const Vec3> gt, std::span<const Vec3> est, std::span<const double> deploy_legs,
                            int dim, const BaselineConfig& config, Rng& rng) {
    const std::size_t n = gt.size();
    BaselineResult out;
    out.est.assign(est.begin(), est.end());
    const double eps = deg_to_rad(config.epsilon_deg);
    const auto neighbors = nearest_neighbors(gt, config.neighbors_k, config.neighbor_radius);
    std::vector<double> radius(n);
    std::vector<double> conf(n);
    std::vector<bool> skipped(n, false);
    auto recompute = [&](std::size_t i) {
        std::vector<NeighborDistance> nd;
        for (std::size_t j : neighbors[i]) {
            nd.push_back({true, distance(gt[i], gt[j])});
        }
        conf[i] = confidence(radius[i], nd);
    };
    for (std::size_t i = 0; i < n; ++i) {
        radius[i] = leg_error_radius(deploy_legs[i], eps, config.confidence_mode);
        skipped[i] = neighbors[i].size() < 3;
        out.skipped_fls += skipped[i] ? 1 : 0;
        recompute(i);
    }
    Rng observer = rng.fork(0x68640001);
    auto measure = [&] { return hd(out.est, gt, config.translation, observer, kStochasticSampleSize); };
    auto min_conf = [&] {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!skipped[i]) {
                m = std::min(m, conf[i]);
            }
        }
        return m;
    };
    out.trace.push_back({0, std::nullopt, SolveFailure::none, min_conf(), measure()});
    const std::size_t max_iters = config.max_iters ? config.max_iters : 50 * n;
    std::set<std::size_t> failed;
    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        if (out.skipped_fls == n) {
            break;
        }
        if (min_conf() > config.threshold) {
            out.reached_threshold = true;
            break;
        }
        std::optional<std::size_t> pick;
        for (int pass = 0; pass < 2 && !pick; ++pass) {
            for (std::size_t i = 0; i < n; ++i) {
                if (skipped[i] || failed.count(i)) {
                    continue;
                }
                if (!pick || conf[i] < conf[*pick]) {
                    pick = i;
                }
            }
            if (!pick) {
                failed.clear();  // every candidate failed once; draw fresh neighbors
            }
        }
        const std::size_t f = *pick;
        std::vector<std::size_t> pool = neighbors[f];
        for (std::size_t t = 0; t < 3; ++t) {
            std::swap(pool[t], pool[t + rng.below(pool.size() - t)]);
        }
        const Triple a_est{out.est[pool[0]], out.est[pool[1]], out.est[pool[2]]};
        const Triple a_gt{gt[pool[0]], gt[pool[1]], gt[pool[2]]};
        const SolveResult r = config.method == BaselineMethod::triangulation
                                  ? triangulate(gt[f], a_est, a_gt, config.min_center_gap)
                                  : trilaterate(gt[f], a_est, a_gt, dim, config.trilateration_tol);
        ++out.iterations;
        if (r.ok()) {
            out.est[f] = *r.point;
            const double r0 = radius[pool[0]], r1 = radius[pool[1]], r2 = radius[pool[2]];
            radius[f] = config.confidence_mode == ConfidenceMode::worst ? std::max({r0, r1, r2}) : (r0 + r1 + r2) / 3.0;
            recompute(f);
            ++out.relocations;
        } else {
            failed.insert(f);
            ++out.failures;
        }
        out.trace.push_back({iter, f, r.failure, min_conf(), measure()});
    }
    out.final_hd = out.trace.back().hd;
    return out;
}

}  // namespace swarmer
