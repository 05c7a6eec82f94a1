#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "ocpose/errors.hpp"
#include "ocpose/mask.hpp"

namespace ocpose {
namespace {

using testing::mask_from_points;
using testing::random_mask;
using testing::scan_distance;

TEST(DecodeRle, SingleBackgroundRun) {
  const std::vector<std::int64_t> counts{4};
  const BinaryMask m = decode_rle(counts, {2, 2});
  EXPECT_EQ(m.foreground_count(), 0u);
}

TEST(DecodeRle, LeadingZeroRunGivesAllForeground) {
  const std::vector<std::int64_t> counts{0, 4};
  const BinaryMask m = decode_rle(counts, {2, 2});
  EXPECT_EQ(m.foreground_count(), 4u);
}

TEST(DecodeRle, ColumnMajorOrder) {
  // Column-major positions 1 and 2 are (row 1, col 0) and (row 0, col 1).
  const std::vector<std::int64_t> counts{1, 2, 1};
  const BinaryMask m = decode_rle(counts, {2, 2});
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_TRUE(m.at(1, 0));
  EXPECT_TRUE(m.at(0, 1));
  EXPECT_FALSE(m.at(1, 1));
}

TEST(DecodeRle, EmptyImage) {
  const BinaryMask m = decode_rle({}, {0, 0});
  EXPECT_EQ(m.foreground_count(), 0u);
}

TEST(DecodeRle, CountMismatchThrows) {
  const std::vector<std::int64_t> counts{1, 2};
  EXPECT_THROW(decode_rle(counts, {2, 2}), DecodeError);
}

TEST(DecodeRle, EncodeRoundTrip) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const BinaryMask m = random_mask(rng, {7, 9}, 0.4);
    const auto counts = encode_rle(m);
    EXPECT_EQ(decode_rle(counts, m.size()), m);
  }
}

TEST(DecodeCompressedRle, MatchesUncompressed) {
  // Counts [1, 2, 1] in the LEB128-style string alphabet.
  const BinaryMask a = decode_compressed_rle("121", {2, 2});
  const std::vector<std::int64_t> counts{1, 2, 1};
  EXPECT_EQ(a, decode_rle(counts, {2, 2}));
}

TEST(RasterizePolygon, SquareOverNinePixelCenters) {
  const std::vector<Point2> square{{0.5, 0.5}, {3.5, 0.5}, {3.5, 3.5}, {0.5, 3.5}};
  const BinaryMask m = rasterize_polygon(square, {6, 6});
  EXPECT_EQ(m.foreground_count(), 9u);
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 3; ++c) EXPECT_TRUE(m.at(r, c));
  }
}

TEST(RasterizePolygon, DegenerateIsEmpty) {
  const std::vector<Point2> line{{0, 0}, {3, 3}, {5, 5}};
  EXPECT_EQ(rasterize_polygon(line, {6, 6}).foreground_count(), 0u);
}

TEST(RasterizePolygon, DisjointSquaresUnion) {
  const std::vector<Point2> a{{0.5, 0.5}, {2.5, 0.5}, {2.5, 2.5}, {0.5, 2.5}};
  const std::vector<Point2> b{{4.5, 4.5}, {6.5, 4.5}, {6.5, 6.5}, {4.5, 6.5}};
  const BinaryMask both = rasterize_polygons({a, b}, {8, 8});
  EXPECT_EQ(both, rasterize_polygon(a, {8, 8}).united(rasterize_polygon(b, {8, 8})));
  EXPECT_EQ(both.foreground_count(), 8u);
}

TEST(RasterizePolygon, TooFewVertices) {
  const std::vector<Point2> two{{0, 0}, {1, 1}};
  EXPECT_THROW(rasterize_polygon(two, {4, 4}), GeometryError);
}

TEST(DistanceToMask, OnForegroundIsZero) {
  const BinaryMask m = mask_from_points({20, 20}, {{4, 7}});
  EXPECT_EQ(distance_to_mask({7.0, 4.0}, m), 0.0);
  EXPECT_EQ(distance_to_mask({7.3, 3.8}, m), 0.0);
}

TEST(DistanceToMask, ThreeFourFive) {
  const BinaryMask m = mask_from_points({32, 32}, {{10, 10}});
  EXPECT_NEAR(distance_to_mask({13.0, 14.0}, m), 5.0, 1e-12);
  EXPECT_NEAR(scan_distance({13.0, 14.0}, m), 5.0, 1e-12);
}

TEST(DistanceToMask, EmptyMaskIsInfinite) {
  EXPECT_TRUE(std::isinf(distance_to_mask({1.0, 1.0}, BinaryMask::empty({5, 5}))));
  EXPECT_EQ(distance_to_mask({1.0, 1.0}, BinaryMask::empty({5, 5})), kEmptyMaskDistance);
}

TEST(DistanceToMask, OutsideImage) {
  const BinaryMask m = mask_from_points({10, 10}, {{2, 3}, {8, 8}});
  for (Point2 p : {Point2{-5, -7}, Point2{30, 4}, Point2{4, 25}, Point2{-3.4, 12.6}, Point2{50, 50}}) {
    EXPECT_NEAR(distance_to_mask(p, m), scan_distance(p, m), 1e-9) << p.x << "," << p.y;
  }
}

TEST(DistanceToMask, MatchesScanOnRandomMasks) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_real_distribution<double> coord(-10.0, 42.0);
  std::uniform_real_distribution<double> dens(0.005, 0.3);
  for (int t = 0; t < 60; ++t) {
    const BinaryMask m = random_mask(rng, {dim(rng), dim(rng)}, dens(rng));
    if (!m.has_foreground()) continue;
    for (int q = 0; q < 25; ++q) {
      const Point2 p{coord(rng), coord(rng)};
      ASSERT_NEAR(distance_to_mask(p, m), scan_distance(p, m), 1e-9);
    }
  }
}

TEST(DistanceToMask, FieldIsZeroExactlyOnForeground) {
  std::mt19937_64 rng(5);
  const BinaryMask m = random_mask(rng, {16, 24}, 0.2);
  const auto field = m.squared_distance_field();
  for (std::int64_t r = 0; r < m.height(); ++r) {
    for (std::int64_t c = 0; c < m.width(); ++c) {
      const double v = field[static_cast<std::size_t>(r * m.width() + c)];
      EXPECT_EQ(v == 0.0, m.at(r, c));
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
}

TEST(DistanceToMask, IntegerTranslationInvariant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 16.0);
  for (int t = 0; t < 20; ++t) {
    const BinaryMask m = random_mask(rng, {16, 16}, 0.05);
    if (!m.has_foreground()) continue;
    // Embed at offset (dr, dc) in a larger canvas.
    const std::int64_t dr = 5, dc = 9;
    std::vector<std::pair<std::int64_t, std::int64_t>> pts;
    for (std::int64_t r = 0; r < 16; ++r) {
      for (std::int64_t c = 0; c < 16; ++c) {
        if (m.at(r, c)) pts.emplace_back(r + dr, c + dc);
      }
    }
    const BinaryMask shifted = mask_from_points({32, 32}, pts);
    for (int q = 0; q < 10; ++q) {
      const Point2 p{coord(rng), coord(rng)};
      EXPECT_EQ(distance_to_mask(p, m),
                distance_to_mask({p.x + static_cast<double>(dc), p.y + static_cast<double>(dr)}, shifted));
    }
  }
}

TEST(DistanceToMask, ZeroIffSnapsToForeground) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coord(-0.49, 11.49);
  const BinaryMask m = random_mask(rng, {12, 12}, 0.3);
  for (int q = 0; q < 500; ++q) {
    const Point2 p{coord(rng), coord(rng)};
    const auto r = static_cast<std::int64_t>(std::floor(p.y + 0.5));
    const auto c = static_cast<std::int64_t>(std::floor(p.x + 0.5));
    EXPECT_EQ(distance_to_mask(p, m) == 0.0, m.at(r, c));
  }
}

TEST(DistanceToMask, SupersetIsNeverFarther) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const BinaryMask sub = random_mask(rng, {20, 20}, 0.05);
    const BinaryMask super = sub.united(random_mask(rng, {20, 20}, 0.05));
    if (!sub.has_foreground()) continue;
    for (std::int64_t r = 0; r < 20; ++r) {
      for (std::int64_t c = 0; c < 20; ++c) {
        EXPECT_LE(super.distance_from_pixel(r, c), sub.distance_from_pixel(r, c));
      }
    }
  }
}

TEST(DistanceToMask, ConcurrentFirstQueries) {
  std::mt19937_64 rng(2);
  const BinaryMask m = random_mask(rng, {64, 64}, 0.01);
  const double expected = scan_distance({30.0, 30.0}, m);
  std::vector<std::thread> workers;
  std::vector<double> got(8);
  for (std::size_t i = 0; i < got.size(); ++i) {
    workers.emplace_back([&, i] { got[i] = distance_to_mask({30.0, 30.0}, m); });
  }
  for (auto& w : workers) w.join();
  for (double g : got) EXPECT_NEAR(g, expected, 1e-12);
}

TEST(DistanceToBbox, InsideIsZero) {
  EXPECT_EQ(distance_to_bbox({5, 5}, {0, 0, 10, 10}), 0.0);
  EXPECT_EQ(distance_to_bbox({10, 3}, {0, 0, 10, 10}), 0.0);
}

TEST(DistanceToBbox, LeftOfEdge) {
  EXPECT_NEAR(distance_to_bbox({-3, 4}, {0, 0, 10, 10}), 3.0, 1e-12);
}

TEST(DistanceToBbox, DiagonalFromCorner) {
  EXPECT_NEAR(distance_to_bbox({13, 14}, {0, 0, 10, 10}), 5.0, 1e-12);
}

TEST(ExpandBbox, KeepsCenter) {
  const BBox b = expand_bbox({10, 20, 4, 6}, 3.0);
  EXPECT_DOUBLE_EQ(b.x + b.w / 2, 12.0);
  EXPECT_DOUBLE_EQ(b.y + b.h / 2, 23.0);
  EXPECT_DOUBLE_EQ(b.w, 12.0);
  EXPECT_DOUBLE_EQ(b.h, 18.0);
}

}  // namespace
}  // namespace ocpose
