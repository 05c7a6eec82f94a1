#pragma once

#include "ocpose/types.hpp"

namespace ocpose {

enum class SimilarityKind { kPoseOks, kBboxOks, kMaskOks, kCrowdOks };

struct SimilarityScore {
  double value = 0.0;  // in [0, 1]
  SimilarityKind kind = SimilarityKind::kPoseOks;
};

// Standard keypoint OKS against an annotated pose, averaged over the GT
// keypoints with visibility > 0.
SimilarityScore oks_pose(const DetectionPose& det, const GroundTruthEntry& gt, const SigmaTable& sigmas);

// OKS against a box: every detected keypoint contributes, with its
// distance to the box (0 inside).
SimilarityScore oks_bbox(const DetectionPose& det, const BBox& box, double scale, const SigmaTable& sigmas);

/// OKS against a pixel mask with confidence-weighted distances.
///
/// Each keypoint's distance to the mask is multiplied by its share of the
/// total keypoint confidence, c_n / sum(c), before entering the Gaussian
/// kernel, so confident keypoints dominate and low-confidence keypoints
/// lying off the mask barely matter. The kernel values are averaged over
/// all N keypoints. If every confidence is 0 the shares fall back to 1/N.
/// An empty mask has infinite distance: keypoints with positive share
/// contribute 0 and zero-share keypoints contribute 1.
SimilarityScore oks_mask(const DetectionPose& det, const BinaryMask& mask, double scale,
                         const SigmaTable& sigmas);

// Same definition as oks_mask, tagged as a crowd score.
SimilarityScore oks_crowd(const DetectionPose& det, const BinaryMask& crowd, double scale,
                          const SigmaTable& sigmas);

// Normalized confidence shares used by oks_mask; they sum to 1.
std::vector<double> confidence_weights(const DetectionPose& det);

// 1 - OKS, dispatched on the GT kind.
double pair_cost(const DetectionPose& det, const GroundTruthEntry& gt, const SigmaTable& sigmas);

}  // namespace ocpose
