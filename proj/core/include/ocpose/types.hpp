#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocpose/mask.hpp"

namespace ocpose {

using ImageId = std::int64_t;
using AnnotationId = std::int64_t;

// COCO visibility flag: 0 unlabeled, 1 labeled but occluded, 2 visible.
struct GtKeypoint {
  double x = 0.0;
  double y = 0.0;
  int visibility = 0;

  bool labeled() const { return visibility > 0; }
  friend bool operator==(const GtKeypoint&, const GtKeypoint&) = default;
};

struct DetKeypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;  // clamped to [0, 1] on load
  friend bool operator==(const DetKeypoint&, const DetKeypoint&) = default;
};

enum class GtKind { kPose, kMask, kCrowdMask };

const char* to_string(GtKind kind);

/// One ground-truth annotation. Exactly the fields of its kind are set:
/// a pose carries keypoints (and no mask); a mask or crowd mask carries a
/// pixel mask (and no keypoints). All kinds carry a bbox and the area the
/// object scale is derived from.
class GroundTruthEntry {
 public:
  static GroundTruthEntry pose(AnnotationId id, std::vector<GtKeypoint> keypoints, BBox bbox,
                               double area);
  static GroundTruthEntry instance_mask(AnnotationId id, BinaryMask mask, BBox bbox, double area);
  static GroundTruthEntry crowd_mask(AnnotationId id, BinaryMask mask, BBox bbox, double area);

  GtKind kind() const { return kind_; }
  AnnotationId id() const { return id_; }
  const std::vector<GtKeypoint>& keypoints() const { return keypoints_; }
  const BinaryMask& mask() const { return *mask_; }
  bool has_mask() const { return mask_.has_value(); }
  const BBox& bbox() const { return bbox_; }
  double area() const { return area_; }
  // Object scale s = sqrt(area).
  double scale() const;
  std::size_t labeled_count() const;

  bool is_crowd() const { return kind_ == GtKind::kCrowdMask; }

  friend bool operator==(const GroundTruthEntry&, const GroundTruthEntry&) = default;

 private:
  GroundTruthEntry(GtKind kind, AnnotationId id, BBox bbox, double area)
      : kind_(kind), id_(id), bbox_(bbox), area_(area) {}

  GtKind kind_;
  AnnotationId id_;
  std::vector<GtKeypoint> keypoints_;
  std::optional<BinaryMask> mask_;
  BBox bbox_;
  double area_;
};

struct DetectionPose {
  ImageId image_id = 0;
  std::vector<DetKeypoint> keypoints;
  double score = 0.0;
  // Position in the source file; the final tie-break of every ranking.
  std::size_t input_index = 0;

  friend bool operator==(const DetectionPose&, const DetectionPose&) = default;
};

struct Scene {
  ImageId image_id = 0;
  MaskSize image_size;
  std::string file_name;
  std::vector<GroundTruthEntry> gts;
  std::vector<DetectionPose> detections;

  std::size_t count(GtKind kind) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Per-joint falloff constants k_n of the OKS kernel exp(-d^2 / (2 s^2 k_n^2)).
/// For COCO these are twice the published per-keypoint sigmas.
class SigmaTable {
 public:
  explicit SigmaTable(std::vector<double> k);

  static SigmaTable coco();
  static SigmaTable from_json_file(const std::string& path);

  std::size_t size() const { return k_.size(); }
  double operator[](std::size_t n) const { return k_[n]; }
  const std::vector<double>& values() const { return k_; }
  // Stable hex digest of the table, for report provenance.
  std::string digest() const;

 private:
  std::vector<double> k_;
};

}  // namespace ocpose
