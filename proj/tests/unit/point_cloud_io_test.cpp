#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "swarmer/point_cloud_io.hpp"

namespace swarmer {
namespace {

ParsedCloud parse(const std::string& text) {
    std::istringstream in(text);
    return parse_point_cloud(in);
}

TEST(ParseCloud, TwoAndThreeColumns) {
    const auto c = parse("1 2\n3 4 5\n");
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.points[0], (Vec3{1, 2, 0}));
    EXPECT_EQ(c.points[1], (Vec3{3, 4, 5}));
}

TEST(ParseCloud, SkipsCommentsBlanksAndCarriageReturns) {
    const auto c = parse("# header\n\n1 1 1\r\n# 9 9 9\n2 2 2\n");
    EXPECT_EQ(c.points.size(), 2u);
}

TEST(ParseCloud, CountsDuplicatesKeepingFirst) {
    const auto c = parse("0 0 0\n1 0 0\n0 0 0\n0 0\n1 0 0\n");
    EXPECT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.duplicates, 3u);
}

TEST(ParseCloud, FourColumnsReportsLine) {
    try {
        parse("0 0 0\n# c\n1 2 3 4\n");
        FAIL() << "expected CloudFormatError";
    } catch (const CloudFormatError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(ParseCloud, RejectsGarbage) {
    EXPECT_THROW(parse("1 x 2\n"), CloudFormatError);
    EXPECT_THROW(parse("1\n"), CloudFormatError);
    EXPECT_THROW(parse("1 nan 2\n"), CloudFormatError);
    EXPECT_THROW(parse("1  2\n"), CloudFormatError);
}

TEST(CloudFile, RoundTripIsExact) {
    const std::vector<Vec3> pts{{0.1, 0.2, 0.3}, {1.0 / 3.0, -2.5e-7, 1e10}, {5, 6, 0}};
    const auto path = std::filesystem::temp_directory_path() / "swarmer_io_roundtrip.xyz";
    write_point_cloud_file(path, pts);
    const auto back = read_point_cloud_file(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.points, pts);
}

TEST(CloudFile, MissingFileIsIoError) {
    EXPECT_THROW(read_point_cloud_file("/nonexistent/dir/cloud.xyz"), IoError);
}

TEST(CloudFile, LoadInfersDimension) {
    const auto path = std::filesystem::temp_directory_path() / "swarmer_io_dim.xyz";
    write_point_cloud_file(path, std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    EXPECT_EQ(load_point_cloud(path).dim(), 2);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace swarmer
