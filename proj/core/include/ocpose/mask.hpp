#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ocpose {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Axis-aligned box in pixels: [x, x + w] x [y, y + h].
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const { return w > 0.0 && h > 0.0; }
  double area() const { return w * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Scales the box about its center. A factor of 1 returns the box unchanged.
BBox expand_bbox(const BBox& box, double factor);

struct MaskSize {
  std::int64_t height = 0;
  std::int64_t width = 0;
  friend bool operator==(const MaskSize&, const MaskSize&) = default;
};

/// Binary pixel mask with lazily computed exact Euclidean distance field.
///
/// Pixel (row r, col c) has its center at image coordinates (x = c, y = r).
/// Masks are immutable once built; copies share the same storage and the
/// same distance cache, which is built at most once and is safe to query
/// from several threads.
class BinaryMask {
 public:
  BinaryMask();
  BinaryMask(MaskSize size, std::vector<std::uint8_t> row_major_pixels);

  static BinaryMask empty(MaskSize size);

  std::int64_t height() const { return size_.height; }
  std::int64_t width() const { return size_.width; }
  MaskSize size() const { return size_; }

  bool at(std::int64_t row, std::int64_t col) const;
  std::span<const std::uint8_t> pixels() const;
  std::size_t foreground_count() const;
  bool has_foreground() const { return foreground_count() > 0; }

  // Squared Euclidean distance from each pixel center to the nearest
  // foreground pixel center, row-major. Entries are +inf for an empty mask.
  std::span<const double> squared_distance_field() const;

  // Distance from an arbitrary integer pixel position (possibly outside
  // the image) to the nearest foreground pixel center.
  double distance_from_pixel(std::int64_t row, std::int64_t col) const;

  // Pixelwise union; sizes must match.
  BinaryMask united(const BinaryMask& other) const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b);

 private:
  struct Storage;
  struct DistanceCache;
  const DistanceCache& cache() const;

  MaskSize size_;
  std::shared_ptr<Storage> storage_;
};

inline constexpr double kEmptyMaskDistance = std::numeric_limits<double>::infinity();

// COCO uncompressed RLE: alternating background/foreground run lengths in
// column-major order, starting with background.
BinaryMask decode_rle(std::span<const std::int64_t> counts, MaskSize size);
std::vector<std::int64_t> encode_rle(const BinaryMask& mask);

// COCO compressed RLE string (the "counts" string variant).
BinaryMask decode_compressed_rle(const std::string& counts, MaskSize size);

// Even-odd fill; a pixel is foreground iff its center lies inside.
BinaryMask rasterize_polygon(std::span<const Point2> vertices, MaskSize size);
BinaryMask rasterize_polygons(const std::vector<std::vector<Point2>>& polygons, MaskSize size);

// The query snaps to the nearest pixel center (round half up) and returns
// the exact distance from there to the nearest foreground pixel center.
// Empty masks and non-finite queries yield kEmptyMaskDistance.
double distance_to_mask(Point2 point, const BinaryMask& mask);

// 0 inside or on the boundary, otherwise the distance to the nearest
// boundary point.
double distance_to_bbox(Point2 point, const BBox& box);

}  // namespace ocpose
