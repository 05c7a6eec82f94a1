#include "ocpose/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ocpose/errors.hpp"
#include "ocpose/matcher.hpp"
#include "ocpose/synthetic.hpp"

namespace ocpose {

std::array<double, 10> oks_thresholds() {
  std::array<double, 10> t{};
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(50 + 5 * i) / 100.0;
  return t;
}

SceneSimilarities::SceneSimilarities(const Scene& scene, const SigmaTable& sigmas,
                                     const RankingOptions& options)
    : image_id_(scene.image_id) {
  for (std::size_t g = 0; g < scene.gts.size(); ++g) {
    if (scene.gts[g].kind() == GtKind::kPose) pose_gt_.push_back(g);
  }
  const std::size_t n = scene.detections.size();
  pose_oks_.resize(n * pose_gt_.size());
  ignore_oks_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const DetectionPose& det = scene.detections[i];
    scores_.push_back(det.score);
    input_index_.push_back(det.input_index);
    for (std::size_t p = 0; p < pose_gt_.size(); ++p) {
      pose_oks_[i * pose_gt_.size() + p] = oks_pose(det, scene.gts[pose_gt_[p]], sigmas).value;
    }
    for (const GroundTruthEntry& gt : scene.gts) {
      if (gt.kind() == GtKind::kPose) continue;
      double v = 0.0;
      if (options.ignore_mode == IgnoreMode::kBbox) {
        v = oks_bbox(det, expand_bbox(gt.bbox(), options.bbox_expand), gt.scale(), sigmas).value;
      } else {
        v = oks_mask(det, gt.mask(), gt.scale(), sigmas).value;
      }
      ignore_oks_[i] = std::max(ignore_oks_[i], v);
    }
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) {
    if (scores_[a] != scores_[b]) return scores_[a] > scores_[b];
    return input_index_[a] < input_index_[b];
  });
}

std::vector<LabeledDetection> greedy_match(const SceneSimilarities& sims, double oks_threshold,
                                           std::size_t detection_limit) {
  std::vector<char> taken(sims.poses(), 0);
  std::vector<LabeledDetection> out;
  out.reserve(sims.detections());
  for (std::size_t i : sims.order_) {
    if (i >= detection_limit) continue;
    LabeledDetection ld{sims.image_id_, i, sims.scores_[i], sims.input_index_[i],
                        DetectionLabel::kFalsePositive};
    std::size_t best = sims.poses();
    double best_oks = -1.0;
    for (std::size_t p = 0; p < sims.poses(); ++p) {
      if (taken[p]) continue;
      if (sims.pose_oks(i, p) > best_oks) {
        best_oks = sims.pose_oks(i, p);
        best = p;
      }
    }
    if (best < sims.poses() && best_oks >= oks_threshold) {
      taken[best] = 1;
      ld.label = DetectionLabel::kTruePositive;
    } else if (sims.ignore_oks(i) >= oks_threshold) {
      ld.label = DetectionLabel::kIgnored;
    }
    out.push_back(ld);
  }
  return out;
}

std::vector<LabeledDetection> greedy_match(const Scene& scene, double oks_threshold,
                                           const SigmaTable& sigmas, const RankingOptions& options) {
  return greedy_match(SceneSimilarities(scene, sigmas, options), oks_threshold);
}

PrCurve average_precision(std::span<const LabeledDetection> labels, std::size_t gt_pose_count,
                          ApInterpolation interpolation) {
  PrCurve curve;
  curve.gt_count = gt_pose_count;
  std::vector<LabeledDetection> ranked;
  for (const LabeledDetection& l : labels) {
    if (l.label == DetectionLabel::kIgnored) {
      ++curve.ignored_count;
    } else {
      ranked.push_back(l);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const LabeledDetection& a, const LabeledDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.input_index != b.input_index) return a.input_index < b.input_index;
    return a.image_id < b.image_id;
  });

  for (const LabeledDetection& l : ranked) {
    if (l.label == DetectionLabel::kTruePositive) {
      ++curve.tp_count;
    } else {
      ++curve.fp_count;
    }
    PrSample s;
    s.score = l.score;
    s.recall = gt_pose_count ? static_cast<double>(curve.tp_count) / static_cast<double>(gt_pose_count) : 0.0;
    s.precision = static_cast<double>(curve.tp_count) / static_cast<double>(curve.tp_count + curve.fp_count);
    curve.samples.push_back(s);
  }
  double running = 0.0;
  for (auto it = curve.samples.rbegin(); it != curve.samples.rend(); ++it) {
    running = std::max(running, it->precision);
    it->interpolated_precision = running;
  }

  if (gt_pose_count == 0) {
    curve.ap = ranked.empty() ? 1.0 : 0.0;
    return curve;
  }
  if (interpolation == ApInterpolation::kEnvelope) {
    double prev_recall = 0.0;
    for (const PrSample& s : curve.samples) {
      curve.ap += (s.recall - prev_recall) * s.interpolated_precision;
      prev_recall = s.recall;
    }
  } else {
    double sum = 0.0;
    std::size_t k = 0;
    for (int r = 0; r <= 100; ++r) {
      const double t = static_cast<double>(r) / 100.0;
      while (k < curve.samples.size() && curve.samples[k].recall < t) ++k;
      if (k < curve.samples.size()) sum += curve.samples[k].interpolated_precision;
    }
    curve.ap = sum / 101.0;
  }
  return curve;
}

MeanAp mean_average_precision(std::span<const Scene> scenes, const SigmaTable& sigmas,
                              const RankingOptions& options) {
  std::vector<SceneSimilarities> sims;
  std::size_t gt_poses = 0;
  for (const Scene& scene : scenes) {
    sims.emplace_back(scene, sigmas, options);
    gt_poses += scene.count(GtKind::kPose);
  }
  MeanAp out;
  for (double t : oks_thresholds()) {
    std::vector<LabeledDetection> labels;
    for (const SceneSimilarities& s : sims) {
      auto l = greedy_match(s, t);
      labels.insert(labels.end(), l.begin(), l.end());
    }
    PrCurve c = average_precision(labels, gt_poses, options.interpolation);
    c.oks_threshold = t;
    out.map += c.ap;
    out.curves.push_back(std::move(c));
  }
  out.map /= static_cast<double>(out.curves.size());
  return out;
}

namespace {

constexpr double kFarFactor = 20.0;

// Every keypoint n sits at least 20 s k_n from the GT, measured the way
// the matching similarity for that GT measures it.
bool far_from(const std::vector<DetKeypoint>& kps, const GroundTruthEntry& gt, const SigmaTable& sigmas) {
  const double s = gt.scale();
  const double share = 1.0 / static_cast<double>(kps.size());
  for (std::size_t n = 0; n < kps.size(); ++n) {
    const double limit = kFarFactor * s * sigmas[n];
    const Point2 p{kps[n].x, kps[n].y};
    if (gt.kind() == GtKind::kPose) {
      for (const GtKeypoint& g : gt.keypoints()) {
        if (g.labeled() && std::hypot(p.x - g.x, p.y - g.y) < limit) return false;
      }
    } else if (distance_to_mask(p, gt.mask()) * share < limit) {
      return false;
    }
  }
  return true;
}

std::vector<DetKeypoint> far_pose(const Scene& scene, const SigmaTable& sigmas) {
  double height = 32.0;
  for (const GroundTruthEntry& gt : scene.gts) height = std::min(height, gt.scale());
  height = std::max(height, 4.0);
  const double step = 4.0;
  const auto w = static_cast<double>(scene.image_size.width);
  const auto h = static_cast<double>(scene.image_size.height);
  for (double y = 0.0; y + height <= h; y += step) {
    for (double x = 0.0; x + height / 2.0 <= w; x += step) {
      // Uniform keypoint confidences, so mask shares are exactly 1/N.
      std::vector<DetKeypoint> kps = place_pose(sigmas.size(), x, y, height, 0.5);
      const bool ok = std::all_of(scene.gts.begin(), scene.gts.end(),
                                  [&](const GroundTruthEntry& gt) { return far_from(kps, gt, sigmas); });
      if (ok) return kps;
    }
  }
  throw GenerationError("image " + std::to_string(scene.image_id) +
                        " has no room for a far false positive");
}

double pooled_ocpose(std::span<const Scene> scenes, const SigmaTable& sigmas) {
  std::vector<MatchPlan> plans;
  for (const Scene& scene : scenes) plans.push_back(solve_transport(build_cost_matrix(scene, sigmas)));
  return ocpose_score(plans).pooled;
}

}  // namespace

std::vector<Scene> inject_far_false_positives(std::span<const Scene> scenes, std::size_t count,
                                              double fp_score, const SigmaTable& sigmas) {
  std::vector<Scene> out(scenes.begin(), scenes.end());
  if (count == 0) return out;
  if (out.empty()) throw UsageError("cannot inject false positives into an empty scene set");
  std::size_t next_index = 0;
  for (const Scene& scene : out) {
    for (const DetectionPose& d : scene.detections) {
      if (!(fp_score < d.score)) {
        throw UsageError("injected score must be below every real detection score");
      }
      next_index = std::max(next_index, d.input_index + 1);
    }
  }
  std::vector<std::vector<DetKeypoint>> location(out.size());
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = k % out.size();
    if (location[s].empty()) location[s] = far_pose(out[s], sigmas);
    DetectionPose fp;
    fp.image_id = out[s].image_id;
    fp.keypoints = location[s];
    fp.score = fp_score;
    fp.input_index = next_index++;
    out[s].detections.push_back(std::move(fp));
  }
  return out;
}

FpInjectionReport fp_injection_experiment(std::span<const Scene> scenes, std::size_t count,
                                          double fp_score, const SigmaTable& sigmas,
                                          const RankingOptions& options) {
  FpInjectionReport r;
  r.injected = count;
  const MeanAp before = mean_average_precision(scenes, sigmas, options);
  r.ap_before = before.map;
  r.fp_before = before.curves.front().fp_count;
  r.ocpose_before = pooled_ocpose(scenes, sigmas);

  const std::vector<Scene> injected = inject_far_false_positives(scenes, count, fp_score, sigmas);
  const MeanAp after = mean_average_precision(injected, sigmas, options);
  r.ap_after = after.map;
  r.fp_after = after.curves.front().fp_count;
  r.ocpose_after = pooled_ocpose(injected, sigmas);
  return r;
}

}  // namespace ocpose
