#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmer/geometry.hpp"

namespace swarmer {

// Malformed point-cloud text. line is 1-based, 0 when not tied to a line.
class CloudFormatError : public std::runtime_error {
public:
    CloudFormatError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParsedCloud {
    std::vector<Vec3> points;       // duplicates removed, first occurrence kept
    std::size_t duplicates = 0;     // number of dropped repeat lines
};

// "L H D" per line, single-space separated; '#' lines and blank lines are
// skipped; two columns mean d = 0.
ParsedCloud parse_point_cloud(std::istream& in);
ParsedCloud read_point_cloud_file(const std::filesystem::path& path);

// Loads and deduplicates; throws CloudFormatError / IoError / GeometryError.
PointCloud load_point_cloud(const std::filesystem::path& path);

// Writes three columns at round-trip precision.
void write_point_cloud(std::ostream& out, std::span<const Vec3> points);
void write_point_cloud_file(const std::filesystem::path& path, std::span<const Vec3> points);

}  // namespace swarmer
