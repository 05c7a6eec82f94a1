#pragma once

#include <array>
#include <span>
#include <vector>

#include "ocpose/similarity.hpp"
#include "ocpose/types.hpp"

namespace ocpose {

enum class DetectionLabel { kTruePositive, kFalsePositive, kIgnored };

// Which similarity decides whether an unmatched detection falls inside an
// ignore region (an unannotated person or a crowd).
enum class IgnoreMode {
  kMask,  // confidence-weighted mask OKS
  kBbox,  // legacy box OKS on the (optionally expanded) annotation box
};

enum class ApInterpolation {
  kEnvelope,    // exact area under the monotone precision envelope
  kCoco101,     // mean of the envelope at recall 0, 0.01, ..., 1
};

struct RankingOptions {
  IgnoreMode ignore_mode = IgnoreMode::kMask;
  double bbox_expand = 1.0;
  ApInterpolation interpolation = ApInterpolation::kEnvelope;
};

// OKS thresholds 0.50, 0.55, ..., 0.95.
std::array<double, 10> oks_thresholds();

struct LabeledDetection {
  ImageId image_id = 0;
  std::size_t detection = 0;  // index into Scene::detections
  double score = 0.0;
  std::size_t input_index = 0;
  DetectionLabel label = DetectionLabel::kFalsePositive;
};

/// OKS values of one scene that the greedy matcher needs at any threshold.
class SceneSimilarities {
 public:
  SceneSimilarities(const Scene& scene, const SigmaTable& sigmas, const RankingOptions& options = {});

  std::size_t detections() const { return ignore_oks_.size(); }
  std::size_t poses() const { return pose_gt_.size(); }
  // OKS_p of detection i against the p-th GT pose.
  double pose_oks(std::size_t det, std::size_t pose) const { return pose_oks_[det * poses() + pose]; }
  // Best ignore-region similarity of detection i (0 if there is none).
  double ignore_oks(std::size_t det) const { return ignore_oks_[det]; }

 private:
  friend std::vector<LabeledDetection> greedy_match(const SceneSimilarities&, double, std::size_t);
  ImageId image_id_ = 0;
  std::vector<double> scores_;
  std::vector<std::size_t> input_index_;
  std::vector<std::size_t> pose_gt_;
  std::vector<double> pose_oks_;
  std::vector<double> ignore_oks_;
  std::vector<std::size_t> order_;  // detections by descending score
};

/// COCO-style greedy assignment at one OKS threshold.
///
/// Detections are visited by descending score (ties by input order). Each
/// claims its highest-OKS unmatched GT pose and becomes a true positive if
/// that OKS reaches the threshold. Otherwise it is ignored when it lies in
/// an unannotated person or crowd region at the same threshold, and is a
/// false positive if not.
///
/// `detection_limit` restricts the match to the first detections of the
/// scene, which for score-sorted scenes is a confidence-threshold cut.
std::vector<LabeledDetection> greedy_match(const SceneSimilarities& sims, double oks_threshold,
                                           std::size_t detection_limit = static_cast<std::size_t>(-1));
std::vector<LabeledDetection> greedy_match(const Scene& scene, double oks_threshold,
                                           const SigmaTable& sigmas, const RankingOptions& options = {});

struct PrSample {
  double score = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double interpolated_precision = 0.0;
};

struct PrCurve {
  std::vector<PrSample> samples;  // one per ranked, non-ignored detection
  double ap = 0.0;
  std::size_t tp_count = 0;
  std::size_t fp_count = 0;
  std::size_t ignored_count = 0;
  std::size_t gt_count = 0;
  double oks_threshold = 0.0;
};

// Ranks the pooled labels by descending score (ties by input order),
// drops ignored detections and integrates precision over recall.
// With no GT poses the AP is 0 if anything was detected and 1 otherwise.
PrCurve average_precision(std::span<const LabeledDetection> labels, std::size_t gt_pose_count,
                          ApInterpolation interpolation = ApInterpolation::kEnvelope);

struct MeanAp {
  std::vector<PrCurve> curves;  // one per OKS threshold
  double map = 0.0;
};

MeanAp mean_average_precision(std::span<const Scene> scenes, const SigmaTable& sigmas,
                              const RankingOptions& options = {});

struct FpInjectionReport {
  std::size_t injected = 0;
  double ap_before = 0.0;  // mAP over the OKS thresholds
  double ap_after = 0.0;
  double ocpose_before = 0.0;  // pooled
  double ocpose_after = 0.0;
  std::size_t fp_before = 0;  // greedy false positives at OKS 0.5
  std::size_t fp_after = 0;
};

// Appends `count` false positives, scored `fp_score`, far from every GT
// (each keypoint at least 20 s k_n away), distributed round-robin over
// the scenes, and measures both metrics before and after.
FpInjectionReport fp_injection_experiment(std::span<const Scene> scenes, std::size_t count,
                                          double fp_score, const SigmaTable& sigmas,
                                          const RankingOptions& options = {});

// Scenes with the far false positives of fp_injection_experiment added.
std::vector<Scene> inject_far_false_positives(std::span<const Scene> scenes, std::size_t count,
                                              double fp_score, const SigmaTable& sigmas);

}  // namespace ocpose
