#include "swarmer/generate.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "swarmer/rng.hpp"

namespace swarmer {

std::string_view to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::grid:
            return "grid";
        case ShapeKind::line:
            return "line";
        case ShapeKind::ring:
            return "ring";
        case ShapeKind::blob:
            return "blob";
    }
    return "?";
}

std::optional<ShapeKind> parse_shape(std::string_view text) {
    for (auto k : {ShapeKind::grid, ShapeKind::line, ShapeKind::ring, ShapeKind::blob}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    return std::nullopt;
}

std::vector<Vec3> generate_shape(const ShapeSpec& spec) {
    if (spec.n < 1) {
        throw std::invalid_argument("shape needs at least one point");
    }
    if (spec.dim != 2 && spec.dim != 3) {
        throw std::invalid_argument(fmt::format("unsupported dimension {}", spec.dim));
    }
    if (!(spec.spacing > 0.0)) {
        throw std::invalid_argument(fmt::format("spacing must be positive, got {}", spec.spacing));
    }
    const double s = spec.spacing;
    std::vector<Vec3> out;
    out.reserve(spec.n);
    switch (spec.kind) {
        case ShapeKind::grid: {
            auto side = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(spec.n), 1.0 / spec.dim)));
            while (std::pow(static_cast<double>(side - 1), spec.dim) >= static_cast<double>(spec.n) && side > 1) {
                --side;
            }
            for (std::size_t i = 0; out.size() < spec.n; ++i) {
                const double l = static_cast<double>(i % side);
                const double h = static_cast<double>((i / side) % side);
                const double d = spec.dim == 3 ? static_cast<double>(i / (side * side)) : 0.0;
                out.push_back(Vec3{l, h, d} * s);
            }
            break;
        }
        case ShapeKind::line:
            for (std::size_t i = 0; i < spec.n; ++i) {
                out.push_back({static_cast<double>(i) * s, 0.0, 0.0});
            }
            break;
        case ShapeKind::ring: {
            if (spec.n == 1) {
                out.push_back({});
                break;
            }
            const double step = 2.0 * kPi / static_cast<double>(spec.n);
            const double radius = s / (2.0 * std::sin(step / 2.0));
            for (std::size_t i = 0; i < spec.n; ++i) {
                const double a = step * static_cast<double>(i);
                out.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
            }
            break;
        }
        case ShapeKind::blob: {
            Rng rng(spec.seed);
            using Site = std::tuple<long, long, long>;
            std::set<Site> taken{{0, 0, 0}};
            std::vector<Site> sites{{0, 0, 0}};
            const int dirs = spec.dim == 3 ? 6 : 4;
            while (sites.size() < spec.n) {
                const Site& base = sites[rng.below(sites.size())];
                const auto dir = static_cast<int>(rng.below(static_cast<std::uint64_t>(dirs)));
                const long step = dir % 2 == 0 ? 1 : -1;
                Site next = base;
                if (dir / 2 == 0) {
                    std::get<0>(next) += step;
                } else if (dir / 2 == 1) {
                    std::get<1>(next) += step;
                } else {
                    std::get<2>(next) += step;
                }
                if (taken.insert(next).second) {
                    sites.push_back(next);
                }
            }
            for (const auto& [l, h, d] : sites) {
                out.push_back(Vec3{static_cast<double>(l), static_cast<double>(h), static_cast<double>(d)} * s);
            }
            break;
        }
    }
    return out;
}

}  // namespace swarmer
