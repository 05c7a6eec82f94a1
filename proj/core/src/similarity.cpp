#include "ocpose/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "ocpose/errors.hpp"

namespace ocpose {

namespace {

double kernel(double distance, double scale, double k) {
  return std::exp(-(distance * distance) / (2.0 * scale * scale * k * k));
}

void check_arity(const DetectionPose& det, const SigmaTable& sigmas) {
  if (det.keypoints.size() != sigmas.size()) {
    throw ConfigError("detection has " + std::to_string(det.keypoints.size()) +
                      " keypoints but the sigma table has " + std::to_string(sigmas.size()));
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SimilarityScore oks_pose(const DetectionPose& det, const GroundTruthEntry& gt, const SigmaTable& sigmas) {
  if (gt.labeled_count() == 0) throw SchemaError("pose GT has no labeled keypoints");
  check_arity(det, sigmas);
  const auto& kps = gt.keypoints();
  if (kps.size() != det.keypoints.size()) throw ConfigError("GT and detection skeleton sizes differ");
  const double s = gt.scale();
  double sum = 0.0;
  std::size_t labeled = 0;
  for (std::size_t n = 0; n < kps.size(); ++n) {
    if (!kps[n].labeled()) continue;
    const double d = std::hypot(det.keypoints[n].x - kps[n].x, det.keypoints[n].y - kps[n].y);
    sum += kernel(d, s, sigmas[n]);
    ++labeled;
  }
  return {clamp01(sum / static_cast<double>(labeled)), SimilarityKind::kPoseOks};
}

SimilarityScore oks_bbox(const DetectionPose& det, const BBox& box, double scale, const SigmaTable& sigmas) {
  check_arity(det, sigmas);
  double sum = 0.0;
  for (std::size_t n = 0; n < det.keypoints.size(); ++n) {
    const double d = distance_to_bbox({det.keypoints[n].x, det.keypoints[n].y}, box);
    sum += kernel(d, scale, sigmas[n]);
  }
  return {clamp01(sum / static_cast<double>(det.keypoints.size())), SimilarityKind::kBboxOks};
}

std::vector<double> confidence_weights(const DetectionPose& det) {
  const std::size_t n = det.keypoints.size();
  double total = 0.0;
  for (const auto& k : det.keypoints) total += k.confidence;
  std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < n; ++i) w[i] = det.keypoints[i].confidence / total;
  }
  return w;
}

SimilarityScore oks_mask(const DetectionPose& det, const BinaryMask& mask, double scale,
                         const SigmaTable& sigmas) {
  check_arity(det, sigmas);
  const std::vector<double> w = confidence_weights(det);
  double sum = 0.0;
  for (std::size_t n = 0; n < det.keypoints.size(); ++n) {
    if (w[n] == 0.0) {
      sum += 1.0;  // zero share, including inf * 0 on empty masks
      continue;
    }
    const double raw = distance_to_mask({det.keypoints[n].x, det.keypoints[n].y}, mask);
    if (std::isinf(raw)) continue;
    sum += kernel(raw * w[n], scale, sigmas[n]);
  }
  return {clamp01(sum / static_cast<double>(det.keypoints.size())), SimilarityKind::kMaskOks};
}

SimilarityScore oks_crowd(const DetectionPose& det, const BinaryMask& crowd, double scale,
                          const SigmaTable& sigmas) {
  SimilarityScore s = oks_mask(det, crowd, scale, sigmas);
  s.kind = SimilarityKind::kCrowdOks;
  return s;
}

double pair_cost(const DetectionPose& det, const GroundTruthEntry& gt, const SigmaTable& sigmas) {
  switch (gt.kind()) {
    case GtKind::kPose:
      return 1.0 - oks_pose(det, gt, sigmas).value;
    case GtKind::kMask:
      return 1.0 - oks_mask(det, gt.mask(), gt.scale(), sigmas).value;
    case GtKind::kCrowdMask:
      return 1.0 - oks_crowd(det, gt.mask(), gt.scale(), sigmas).value;
  }
  return 1.0;
}

}  // namespace ocpose
