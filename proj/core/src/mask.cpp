#include "ocpose/mask.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "ocpose/errors.hpp"

namespace ocpose {

struct BinaryMask::DistanceCache {
  std::vector<double> squared;  // row-major, +inf when the mask is empty
  // Extreme foreground rows per column and columns per row; -1 when none.
  std::vector<std::int64_t> col_top, col_bottom, row_left, row_right;
};

struct BinaryMask::Storage {
  std::vector<std::uint8_t> pixels;
  std::size_t foreground = 0;
  std::once_flag cache_once;
  std::unique_ptr<DistanceCache> cache;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (q - p)^2 + f[p] over the finite entries of
// f, evaluated at every q. Output entries are +inf when f has no finite
// entry.
void squared_distance_1d(std::span<const double> f, std::span<double> out,
                         std::vector<std::int64_t>& vertices,
                         std::vector<double>& bounds) {
  const auto n = static_cast<std::int64_t>(f.size());
  vertices.clear();
  bounds.clear();
  for (std::int64_t q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double fq = f[q] + static_cast<double>(q) * static_cast<double>(q);
    double s = -kInf;
    while (!vertices.empty()) {
      const std::int64_t v = vertices.back();
      const double fv = f[v] + static_cast<double>(v) * static_cast<double>(v);
      s = (fq - fv) / (2.0 * static_cast<double>(q - v));
      if (s <= bounds.back()) {
        vertices.pop_back();
        bounds.pop_back();
        s = -kInf;
      } else {
        break;
      }
    }
    vertices.push_back(q);
    bounds.push_back(s);
  }
  if (vertices.empty()) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  std::size_t k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (k + 1 < vertices.size() && bounds[k + 1] < static_cast<double>(q)) ++k;
    const auto dq = static_cast<double>(q - vertices[k]);
    out[q] = dq * dq + f[vertices[k]];
  }
}

}  // namespace

BinaryMask::BinaryMask() : BinaryMask(MaskSize{0, 0}, {}) {}

BinaryMask::BinaryMask(MaskSize size, std::vector<std::uint8_t> row_major_pixels)
    : size_(size), storage_(std::make_shared<Storage>()) {
  if (size.height < 0 || size.width < 0) throw DecodeError("mask size must be non-negative");
  if (row_major_pixels.size() != static_cast<std::size_t>(size.height * size.width)) {
    throw DecodeError("mask pixel count does not match its size");
  }
  for (auto& p : row_major_pixels) p = p ? 1 : 0;
  storage_->foreground =
      static_cast<std::size_t>(std::count(row_major_pixels.begin(), row_major_pixels.end(), 1));
  storage_->pixels = std::move(row_major_pixels);
}

BinaryMask BinaryMask::empty(MaskSize size) {
  return BinaryMask(size, std::vector<std::uint8_t>(static_cast<std::size_t>(size.height * size.width), 0));
}

bool BinaryMask::at(std::int64_t row, std::int64_t col) const {
  if (row < 0 || col < 0 || row >= size_.height || col >= size_.width) return false;
  return storage_->pixels[static_cast<std::size_t>(row * size_.width + col)] != 0;
}

std::span<const std::uint8_t> BinaryMask::pixels() const { return storage_->pixels; }

std::size_t BinaryMask::foreground_count() const { return storage_->foreground; }

const BinaryMask::DistanceCache& BinaryMask::cache() const {
  std::call_once(storage_->cache_once, [this] {
    const std::int64_t h = size_.height;
    const std::int64_t w = size_.width;
    auto c = std::make_unique<DistanceCache>();
    c->squared.assign(static_cast<std::size_t>(h * w), kInf);
    c->col_top.assign(static_cast<std::size_t>(w), -1);
    c->col_bottom.assign(static_cast<std::size_t>(w), -1);
    c->row_left.assign(static_cast<std::size_t>(h), -1);
    c->row_right.assign(static_cast<std::size_t>(h), -1);
    const auto& px = storage_->pixels;
    for (std::int64_t r = 0; r < h; ++r) {
      for (std::int64_t col = 0; col < w; ++col) {
        if (!px[static_cast<std::size_t>(r * w + col)]) continue;
        if (c->col_top[col] < 0) c->col_top[col] = r;
        c->col_bottom[col] = r;
        if (c->row_left[r] < 0) c->row_left[r] = col;
        c->row_right[r] = col;
      }
    }
    if (storage_->foreground > 0) {
      std::vector<std::int64_t> vertices;
      std::vector<double> bounds;
      // Columns first, then rows.
      std::vector<double> f(static_cast<std::size_t>(h)), out(static_cast<std::size_t>(h));
      for (std::int64_t col = 0; col < w; ++col) {
        for (std::int64_t r = 0; r < h; ++r) f[r] = px[r * w + col] ? 0.0 : kInf;
        squared_distance_1d(f, out, vertices, bounds);
        for (std::int64_t r = 0; r < h; ++r) c->squared[r * w + col] = out[r];
      }
      f.resize(static_cast<std::size_t>(w));
      out.resize(static_cast<std::size_t>(w));
      for (std::int64_t r = 0; r < h; ++r) {
        std::copy_n(c->squared.begin() + r * w, w, f.begin());
        squared_distance_1d(f, out, vertices, bounds);
        std::copy_n(out.begin(), w, c->squared.begin() + r * w);
      }
    }
    storage_->cache = std::move(c);
  });
  return *storage_->cache;
}

std::span<const double> BinaryMask::squared_distance_field() const { return cache().squared; }

double BinaryMask::distance_from_pixel(std::int64_t row, std::int64_t col) const {
  if (storage_->foreground == 0) return kEmptyMaskDistance;
  const DistanceCache& c = cache();
  const std::int64_t h = size_.height;
  const std::int64_t w = size_.width;
  if (row >= 0 && row < h && col >= 0 && col < w) {
    return std::sqrt(c.squared[static_cast<std::size_t>(row * w + col)]);
  }
  double best = kInf;
  const auto qr = static_cast<double>(row);
  const auto qc = static_cast<double>(col);
  if (row < 0 || row >= h) {
    // Per column, the closest foreground pixel is the extreme one facing
    // the query.
    for (std::int64_t x = 0; x < w; ++x) {
      if (c.col_top[x] < 0) continue;
      const double dy = row < 0 ? static_cast<double>(c.col_top[x]) - qr
                                : qr - static_cast<double>(c.col_bottom[x]);
      const double dx = qc - static_cast<double>(x);
      best = std::min(best, dx * dx + dy * dy);
    }
  } else {
    for (std::int64_t y = 0; y < h; ++y) {
      if (c.row_left[y] < 0) continue;
      const double dx = col < 0 ? static_cast<double>(c.row_left[y]) - qc
                                : qc - static_cast<double>(c.row_right[y]);
      const double dy = qr - static_cast<double>(y);
      best = std::min(best, dx * dx + dy * dy);
    }
  }
  return std::sqrt(best);
}

BinaryMask BinaryMask::united(const BinaryMask& other) const {
  if (other.size() != size_) throw DecodeError("cannot unite masks of different sizes");
  std::vector<std::uint8_t> px(storage_->pixels);
  const auto& rhs = other.storage_->pixels;
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = px[i] | rhs[i];
  return BinaryMask(size_, std::move(px));
}

bool operator==(const BinaryMask& a, const BinaryMask& b) {
  if (a.size_ != b.size_) return false;
  if (a.storage_ == b.storage_) return true;
  return a.storage_->pixels == b.storage_->pixels;
}

BBox expand_bbox(const BBox& box, double factor) {
  if (factor == 1.0) return box;
  const double cx = box.x + box.w / 2.0;
  const double cy = box.y + box.h / 2.0;
  const double w = box.w * factor;
  const double h = box.h * factor;
  return BBox{cx - w / 2.0, cy - h / 2.0, w, h};
}

BinaryMask decode_rle(std::span<const std::int64_t> counts, MaskSize size) {
  const std::int64_t total = size.height * size.width;
  std::int64_t sum = 0;
  for (auto c : counts) {
    if (c < 0) throw DecodeError("RLE run lengths must be non-negative");
    sum += c;
  }
  if (sum != total) {
    throw DecodeError("RLE counts sum to " + std::to_string(sum) + " but mask has " +
                      std::to_string(total) + " pixels");
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(total), 0);
  std::int64_t pos = 0;
  bool foreground = false;
  for (auto c : counts) {
    if (foreground) {
      for (std::int64_t k = pos; k < pos + c; ++k) {
        const std::int64_t row = k % size.height;
        const std::int64_t col = k / size.height;
        px[static_cast<std::size_t>(row * size.width + col)] = 1;
      }
    }
    pos += c;
    foreground = !foreground;
  }
  return BinaryMask(size, std::move(px));
}

std::vector<std::int64_t> encode_rle(const BinaryMask& mask) {
  std::vector<std::int64_t> counts;
  const std::int64_t h = mask.height();
  const std::int64_t w = mask.width();
  bool current = false;
  std::int64_t run = 0;
  for (std::int64_t col = 0; col < w; ++col) {
    for (std::int64_t row = 0; row < h; ++row) {
      const bool v = mask.at(row, col);
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

BinaryMask decode_compressed_rle(const std::string& s, MaskSize size) {
  std::vector<std::int64_t> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw DecodeError("truncated compressed RLE string");
      const std::int64_t c = static_cast<std::int64_t>(s[p]) - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<std::int64_t>(-1) * (std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    counts.push_back(x);
  }
  return decode_rle(counts, size);
}

BinaryMask rasterize_polygon(std::span<const Point2> vertices, MaskSize size) {
  if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  const std::int64_t h = size.height;
  const std::int64_t w = size.width;
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h * w), 0);
  std::vector<double> crossings;
  const std::size_t n = vertices.size();
  for (std::int64_t row = 0; row < h; ++row) {
    const auto y = static_cast<double>(row);
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = vertices[i];
      const Point2 b = vertices[(i + 1) % n];
      // Half-open in y so shared vertices are counted once.
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
        crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      const auto first = static_cast<std::int64_t>(std::ceil(crossings[i]));
      const double end = crossings[i + 1];
      for (std::int64_t col = std::max<std::int64_t>(first, 0);
           col < w && static_cast<double>(col) < end; ++col) {
        px[static_cast<std::size_t>(row * w + col)] = 1;
      }
    }
  }
  return BinaryMask(size, std::move(px));
}

BinaryMask rasterize_polygons(const std::vector<std::vector<Point2>>& polygons, MaskSize size) {
  BinaryMask out = BinaryMask::empty(size);
  for (const auto& poly : polygons) out = out.united(rasterize_polygon(poly, size));
  return out;
}

double distance_to_mask(Point2 point, const BinaryMask& mask) {
  if (!mask.has_foreground()) return kEmptyMaskDistance;
  if (!std::isfinite(point.x) || !std::isfinite(point.y)) return kEmptyMaskDistance;
  // Keep the snapped coordinate representable; anything this far is
  // effectively at infinity for OKS purposes anyway.
  constexpr double kLimit = 9.0e15;
  const double sx = std::clamp(std::floor(point.x + 0.5), -kLimit, kLimit);
  const double sy = std::clamp(std::floor(point.y + 0.5), -kLimit, kLimit);
  return mask.distance_from_pixel(static_cast<std::int64_t>(sy), static_cast<std::int64_t>(sx));
}

double distance_to_bbox(Point2 point, const BBox& box) {
  const double dx = std::max({box.x - point.x, 0.0, point.x - (box.x + box.w)});
  const double dy = std::max({box.y - point.y, 0.0, point.y - (box.y + box.h)});
  return std::hypot(dx, dy);
}

}  // namespace ocpose
