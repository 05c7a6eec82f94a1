#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ocpose/dataset_io.hpp"
#include "ocpose/synthetic.hpp"
#include "ocpose/types.hpp"

namespace ocpose::testing {

inline SigmaTable uniform_sigmas(std::size_t n, double k = 0.1) {
  return SigmaTable(std::vector<double>(n, k));
}

inline DetectionPose det_at(std::vector<Point2> pts, double conf = 1.0, double score = 1.0) {
  DetectionPose d;
  for (const Point2& p : pts) d.keypoints.push_back({p.x, p.y, conf});
  d.score = score;
  return d;
}

inline GroundTruthEntry pose_gt(AnnotationId id, const std::vector<Point2>& pts, double area,
                                int visibility = 2) {
  std::vector<GtKeypoint> kps;
  for (const Point2& p : pts) kps.push_back({p.x, p.y, visibility});
  return GroundTruthEntry::pose(id, std::move(kps), BBox{0, 0, 1, 1}, area);
}

inline BinaryMask mask_from_points(MaskSize size, const std::vector<std::pair<std::int64_t, std::int64_t>>& rc) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(size.height * size.width), 0);
  for (auto [r, c] : rc) px[static_cast<std::size_t>(r * size.width + c)] = 1;
  return BinaryMask(size, std::move(px));
}

inline BinaryMask random_mask(std::mt19937_64& rng, MaskSize size, double density) {
  std::bernoulli_distribution on(density);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(size.height * size.width));
  for (auto& p : px) p = on(rng) ? 1 : 0;
  return BinaryMask(size, std::move(px));
}

// Every foreground pixel center, checked one by one.
inline double scan_distance(Point2 p, const BinaryMask& m) {
  double best = std::numeric_limits<double>::infinity();
  const double sx = std::floor(p.x + 0.5);
  const double sy = std::floor(p.y + 0.5);
  for (std::int64_t r = 0; r < m.height(); ++r) {
    for (std::int64_t c = 0; c < m.width(); ++c) {
      if (m.at(r, c)) best = std::min(best, std::hypot(sx - static_cast<double>(c), sy - static_cast<double>(r)));
    }
  }
  return best;
}

// Ten single-pose images with one exact detection each.
inline std::vector<Scene> perfect_ten() {
  SyntheticSpec spec;
  spec.gt_poses = 1;
  spec.seed = 11;
  return generate_synthetic_dataset(spec, 10);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ocpose_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text_file(file(name), text);
    return file(name);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string write_scenes(const TempDir& dir, const std::string& stem, const std::vector<Scene>& scenes) {
  std::vector<DetectionPose> dets;
  for (const Scene& s : scenes) dets.insert(dets.end(), s.detections.begin(), s.detections.end());
  dir.write(stem + "_gt.json", serialize_ground_truth(scenes));
  return dir.write(stem + "_dt.json", serialize_detections(dets));
}

}  // namespace ocpose::testing
