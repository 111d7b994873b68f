#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "swarmer/geometry.hpp"

namespace swarmer {

enum class ShapeKind { grid, line, ring, blob };

std::string_view to_string(ShapeKind kind);
std::optional<ShapeKind> parse_shape(std::string_view text);

struct ShapeSpec {
    ShapeKind kind = ShapeKind::grid;
    std::size_t n = 64;
    int dim = 2;
    double spacing = 1.0;
    std::uint64_t seed = 1;
};

// grid: row-major lattice with side ceil(n^(1/dim)), first n points.
// line: n points along L. ring: n points on a circle in the L-H plane whose
// chord between neighbors is spacing. blob: a connected cluster grown on the
// lattice from the origin, one random free neighbor site at a time.
std::vector<Vec3> generate_shape(const ShapeSpec& spec);

}  // namespace swarmer
