#include "swarmer/point_cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace swarmer {

namespace {

double parse_number(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw CloudFormatError(fmt::format("line {}: '{}' is not a number", line_no, token), line_no);
    }
    if (!std::isfinite(value)) {
        throw CloudFormatError(fmt::format("line {}: non-finite coordinate '{}'", line_no, token), line_no);
    }
    return value;
}

}  // namespace

ParsedCloud parse_point_cloud(std::istream& in) {
    ParsedCloud out;
    std::set<std::tuple<double, double, double>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<std::string_view> tokens;
        std::string_view rest(line);
        while (!rest.empty()) {
            const auto sep = rest.find(' ');
            tokens.push_back(rest.substr(0, sep));
            if (sep == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(sep + 1);
        }
        if (tokens.size() == 1 && tokens[0].empty()) {
            continue;
        }
        if (tokens.size() < 2 || tokens.size() > 3) {
            throw CloudFormatError(
                fmt::format("line {}: expected 2 or 3 columns, found {}", line_no, tokens.size()), line_no);
        }
        Vec3 p{parse_number(tokens[0], line_no), parse_number(tokens[1], line_no),
               tokens.size() == 3 ? parse_number(tokens[2], line_no) : 0.0};
        if (seen.emplace(p.l, p.h, p.d).second) {
            out.points.push_back(p);
        } else {
            ++out.duplicates;
        }
    }
    return out;
}

ParsedCloud read_point_cloud_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}'", path.string()));
    }
    return parse_point_cloud(in);
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
    ParsedCloud parsed = read_point_cloud_file(path);
    if (parsed.points.empty()) {
        throw CloudFormatError(fmt::format("'{}': empty point cloud", path.string()), 0);
    }
    return PointCloud::from_points(std::move(parsed.points));
}

void write_point_cloud(std::ostream& out, std::span<const Vec3> points) {
    for (const Vec3& p : points) {
        out << fmt::format("{} {} {}\n", p.l, p.h, p.d);
    }
}

void write_point_cloud_file(const std::filesystem::path& path, std::span<const Vec3> points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    write_point_cloud(out, points);
    if (!out) {
        throw IoError(fmt::format("write failed for '{}'", path.string()));
    }
}

}  // namespace swarmer
