#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "swarmer/baselines.hpp"

namespace swarmer {
namespace {

// Signed angle at x between the rays to p and q.
double angle_at(const Vec3& x, const Vec3& p, const Vec3& q) {
    const Vec3 a = p - x;
    const Vec3 b = q - x;
    return std::atan2(a.l * b.h - a.h * b.l, a.l * b.l + a.h * b.h);
}

// Coarse-to-fine grid search for the point whose subtended angles match.
Vec3 grid_search_triangulation(const Vec3& lg, const Triple& est, const Triple& gt) {
    const double t12 = angle_at(lg, gt[0], gt[1]);
    const double t23 = angle_at(lg, gt[1], gt[2]);
    auto cost = [&](const Vec3& x) {
        const double e1 = std::remainder(angle_at(x, est[0], est[1]) - t12, 2 * kPi);
        const double e2 = std::remainder(angle_at(x, est[1], est[2]) - t23, 2 * kPi);
        return e1 * e1 + e2 * e2;
    };
    Vec3 best{0, 0, 0};
    double span = 20.0;
    for (int level = 0; level < 12; ++level) {
        Vec3 next = best;
        double best_cost = cost(best);
        for (int i = -40; i <= 40; ++i) {
            for (int j = -40; j <= 40; ++j) {
                const Vec3 x{best.l + span * i / 40.0, best.h + span * j / 40.0, 0.0};
                const double c = cost(x);
                if (c < best_cost) {
                    best_cost = c;
                    next = x;
                }
            }
        }
        best = next;
        span /= 8.0;
    }
    return best;
}

TEST(Confidence, WorkedExamples) {
    const NeighborDistance two[] = {{true, 10.0}, {true, 4.0}};
    EXPECT_NEAR(confidence(1.0, two), 0.65, 1e-12);
    const NeighborDistance some[] = {{true, 3.0}, {true, 5.0}};
    EXPECT_EQ(confidence(0.0, some), 1.0);
    const NeighborDistance gone[] = {{false, 1.0}, {false, 2.0}, {false, 3.0}};
    EXPECT_EQ(confidence(0.5, gone), 0.0);
    EXPECT_EQ(confidence(0.5, {}), 0.0);
}

TEST(Confidence, NonIncreasingInRadius) {
    const NeighborDistance ns[] = {{true, 1.0}, {true, 2.0}, {true, 3.5}, {false, 1.0}};
    double prev = confidence(0.0, ns);
    for (double r = 0.01; r < 5.0; r += 0.01) {
        const double c = confidence(r, ns);
        ASSERT_LE(c, prev + 1e-15);
        ASSERT_GE(c, 0.0);
        prev = c;
    }
}

TEST(Confidence, LegRadius) {
    const double eps = deg_to_rad(5.0);
    EXPECT_NEAR(leg_error_radius(10.0, eps, ConfidenceMode::worst), 0.8724, 5e-5);
    // Mean chord by quadrature.
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        sum += 2 * 10.0 * std::sin(eps * (i + 0.5) / n / 2.0);
    }
    EXPECT_NEAR(leg_error_radius(10.0, eps, ConfidenceMode::average), sum / n, 1e-9);
    EXPECT_EQ(leg_error_radius(10.0, 0.0, ConfidenceMode::worst), 0.0);
}

TEST(Triangulate, SquareExampleMatchesGridSearch) {
    const Triple gt{Vec3{0, 0, 0}, Vec3{2, 0, 0}, Vec3{2, 2, 0}};
    const Vec3 lg{-1, 3, 0};
    // Estimated anchors rotated by 30 degrees, scaled by 1.5 and shifted.
    const double c = std::cos(kPi / 6) * 1.5;
    const double s = std::sin(kPi / 6) * 1.5;
    auto xf = [&](const Vec3& p) { return Vec3{c * p.l - s * p.h + 3, s * p.l + c * p.h - 1, 0}; };
    const Triple est{xf(gt[0]), xf(gt[1]), xf(gt[2])};
    const auto r = triangulate(lg, est, gt);
    ASSERT_TRUE(r.ok()) << to_string(r.failure);
    EXPECT_NEAR(distance(*r.point, xf(lg)), 0.0, 1e-9);
    EXPECT_NEAR(distance(*r.point, grid_search_triangulation(lg, est, gt)), 0.0, 1e-6);
}

TEST(Triangulate, DegenerateFixturesFail) {
    const Triple gt{Vec3{2, 0, 0}, Vec3{2, 2, 0}, Vec3{0, 2, 0}};
    const Triple stacked{Vec3{1, 1, 0}, Vec3{1, 1, 0}, Vec3{1, 1, 0}};
    EXPECT_FALSE(triangulate({0, 0, 0}, stacked, gt).ok());
    const Triple line{Vec3{1, 0, 0}, Vec3{2, 0, 0}, Vec3{0, 3, 0}};
    EXPECT_FALSE(triangulate({0, 0, 0}, line, line).ok());
}

TEST(Trilaterate, PlanarExample) {
    const Triple gt{Vec3{0, 0, 0}, Vec3{4, 0, 0}, Vec3{0, 4, 0}};
    const auto r = trilaterate({1, 1, 0}, gt, gt, 2);
    ASSERT_TRUE(r.ok());
    EXPECT_NEAR(distance(*r.point, {1, 1, 0}), 0.0, 1e-12);
    Triple shifted = gt;
    for (Vec3& p : shifted) {
        p += Vec3{2, -3, 0};
    }
    const auto s = trilaterate({1, 1, 0}, shifted, gt, 2);
    ASSERT_TRUE(s.ok());
    EXPECT_NEAR(distance(*s.point, {3, -2, 0}), 0.0, 1e-12);
}

TEST(Trilaterate, SpatialKeepsChirality) {
    const Triple gt{Vec3{0, 0, 0}, Vec3{4, 0, 0}, Vec3{0, 4, 0}};
    for (double z : {2.0, -2.0}) {
        const auto r = trilaterate({1, 1, z}, gt, gt, 3);
        ASSERT_TRUE(r.ok());
        EXPECT_NEAR(distance(*r.point, {1, 1, z}), 0.0, 1e-9);
    }
}

TEST(Trilaterate, FailureModes) {
    const Triple gt{Vec3{0, 0, 0}, Vec3{4, 0, 0}, Vec3{0, 4, 0}};
    const Triple same{Vec3{1, 1, 0}, Vec3{1, 1, 0}, Vec3{0, 4, 0}};
    EXPECT_EQ(trilaterate({1, 1, 0}, same, gt, 2).failure, SolveFailure::centers_too_close);
    const Triple collinear{Vec3{0, 0, 0}, Vec3{4, 0, 0}, Vec3{8, 0, 0}};
    EXPECT_EQ(trilaterate({1, 1, 0}, collinear, gt, 2).failure, SolveFailure::degenerate_angle);
    const Triple far{Vec3{0, 0, 0}, Vec3{40, 0, 0}, Vec3{0, 4, 0}};
    EXPECT_EQ(trilaterate({1, 1, 0}, far, gt, 2).failure, SolveFailure::circles_disjoint);
}

TEST(RunBaseline, ExactEstimatesStopImmediately) {
    std::vector<Vec3> gt;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            gt.push_back({static_cast<double>(i), static_cast<double>(j), 0});
        }
    }
    const std::vector<double> legs(gt.size(), 0.0);
    Rng rng(1);
    for (auto m : {BaselineMethod::triangulation, BaselineMethod::trilateration}) {
        BaselineConfig cfg;
        cfg.method = m;
        const auto r = run_baseline(gt, gt, legs, 2, cfg, rng);
        EXPECT_TRUE(r.reached_threshold);
        EXPECT_EQ(r.iterations, 0u);
        EXPECT_EQ(r.final_hd, 0.0);
        EXPECT_EQ(r.trace.size(), 1u);
    }
}

TEST(RunBaseline, SparseCloudSkipsIsolatedFls) {
    const std::vector<Vec3> gt{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {50, 50, 0}};
    const std::vector<double> legs(gt.size(), 5.0);
    BaselineConfig cfg;
    cfg.epsilon_deg = 5.0;
    cfg.neighbor_radius = 2.0;
    Rng rng(1);
    const auto r = run_baseline(gt, gt, legs, 2, cfg, rng);
    EXPECT_EQ(r.skipped_fls, 1u);
}

TEST(Neighbors, NearestWithTiesByIndex) {
    const std::vector<Vec3> gt{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 2, 0}, {5, 5, 0}};
    const auto nn = nearest_neighbors(gt, 2, 3.0);
    EXPECT_EQ(nn[0], (std::vector<std::size_t>{1, 2}));
    EXPECT_TRUE(nn[4].empty());
}

}  // namespace
}  // namespace swarmer
