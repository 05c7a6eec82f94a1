#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocpose/dataset_io.hpp"
#include "ocpose/matcher.hpp"
#include "ocpose/ranking.hpp"

namespace ocpose {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr const char* kSolverId = "hungarian-transport-v1";

enum class Aggregation { kPooled, kPerImage };

struct EvaluationOptions {
  double threshold = 0.0;  // detection confidence threshold
  SigmaTable sigmas = SigmaTable::coco();
  double bbox_expand = 1.0;
  bool exclude_crowd_matches = false;
  IgnoreMode ignore_mode = IgnoreMode::kMask;
  ApInterpolation interpolation = ApInterpolation::kEnvelope;
  Aggregation aggregation = Aggregation::kPooled;  // picks the headline value
  std::size_t jobs = 1;
};

struct PairRecord {
  std::optional<std::size_t> detection;  // input index in the results file
  std::optional<AnnotationId> gt;        // annotation id
  std::string target;                    // pose, mask, crowd or dummy
  double cost = 0.0;
  bool counted = true;
};

struct ImageResult {
  ImageId image_id = 0;
  double ocpose = 0.0;
  std::size_t pi_one_size = 0;
  double pi_one_cost = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t crowd_matches = 0;
  std::size_t detections = 0;
  std::vector<PairRecord> pairs;
};

struct ApAtThreshold {
  double oks_threshold = 0.0;
  double ap = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t ignored = 0;
};

struct EvaluationReport {
  std::vector<ImageResult> per_image;  // image_id order

  double ocpose = 0.0;  // headline, per the chosen aggregation
  double ocpose_pooled = 0.0;
  double ocpose_per_image_mean = 0.0;
  std::size_t images_counted = 0;
  std::size_t pi_one_size = 0;
  double pi_one_cost = 0.0;
  double map = 0.0;
  std::vector<ApAtThreshold> ap_per_threshold;
  std::size_t total_fp = 0;
  std::size_t total_fn = 0;
  std::size_t total_crowd_matches = 0;

  // Provenance.
  std::string gt_source;
  std::string dt_source;
  KindCounts annotation_counts;
  std::size_t detections_read = 0;
  std::size_t detections_kept = 0;
  std::size_t detections_below_threshold = 0;
  std::size_t detections_rejected = 0;
  EvaluationOptions options;
};

// Inputs for the pipeline, parsed once. Detections are unfiltered (every
// finite entry) so several thresholds can be applied to one load.
struct LoadedInputs {
  GroundTruthSet gt;
  DetectionSet detections;
  std::string gt_source;
  std::string dt_source;
};

LoadedInputs load_inputs(const std::string& gt_path, const std::string& det_path, const SigmaTable& sigmas);

// Copies GT scenes and attaches the detections that pass `threshold`.
// Detections for image ids absent from the GT are a ReferenceError.
std::vector<Scene> attach_detections(const GroundTruthSet& gt, const DetectionSet& detections,
                                     double threshold);

EvaluationReport evaluate(const std::string& gt_path, const std::string& det_path,
                          const EvaluationOptions& options);
EvaluationReport evaluate_inputs(const LoadedInputs& inputs, const EvaluationOptions& options);
// Core pipeline over scenes that already carry their detections.
EvaluationReport evaluate_scenes(std::span<const Scene> scenes, const EvaluationOptions& options);

// Stable, schema-versioned report document. Deterministic for identical
// inputs and options; the worker count is not part of it.
std::string report_to_json(const EvaluationReport& report);
std::string per_image_csv(const EvaluationReport& report);

struct SweepPoint {
  double threshold = 0.0;
  double ocpose = 0.0;  // pooled
  double ocpose_per_image_mean = 0.0;
  double map = 0.0;
  std::size_t kept_detections = 0;
};

struct SweepResult {
  std::vector<SweepPoint> grid;  // ascending threshold
  double argmin_threshold = 0.0;
  double argmin_ocpose = 0.0;
};

// 0.00, 0.01, ..., 0.95.
std::vector<double> default_sweep_grid();

// Minimizes pooled OCpose over the grid; ties go to the lowest threshold.
SweepResult sweep(const std::string& gt_path, const std::string& det_path, std::vector<double> grid,
                  const EvaluationOptions& options);
SweepResult sweep_inputs(const LoadedInputs& inputs, std::vector<double> grid,
                         const EvaluationOptions& options);
std::string sweep_to_json(const SweepResult& result, const EvaluationOptions& options);
std::string sweep_csv(const SweepResult& result);

struct PrCurveSet {
  double confidence_threshold = 0.0;
  MeanAp curves;
  std::size_t kept_detections = 0;
};

std::vector<PrCurveSet> pr_curves(const LoadedInputs& inputs, std::vector<double> confidence_thresholds,
                                  const EvaluationOptions& options);

// Writes pr_t<T>_oks<O>.csv per curve, pr_summary.csv and an SVG overlay
// (pr_curves.svg, OKS 0.50). Returns the paths written.
std::vector<std::string> emit_pr_curves(const std::string& gt_path, const std::string& det_path,
                                        std::vector<double> confidence_thresholds,
                                        const std::string& out_dir, const EvaluationOptions& options);
std::vector<std::string> write_pr_curves(const std::vector<PrCurveSet>& sets, const std::string& out_dir);
std::string pr_curves_svg(const std::vector<PrCurveSet>& sets);

struct CompareRow {
  std::string source;
  double map = 0.0;
  double ocpose = 0.0;  // pooled
  double ocpose_per_image_mean = 0.0;
  std::size_t kept_detections = 0;
  std::size_t fp = 0;
};

struct CompareFlag {
  std::size_t a = 0;
  std::size_t b = 0;
  bool disagree = false;
};

struct Comparison {
  std::vector<CompareRow> rows;
  std::vector<CompareFlag> flags;  // every unordered pair, a < b
};

// True when OCpose strictly prefers one method while mAP does not
// strictly prefer that same method.
bool rank_disagreement(const CompareRow& a, const CompareRow& b);

Comparison compare(const std::string& gt_path, const std::vector<std::string>& det_paths,
                   const EvaluationOptions& options);
Comparison compare_reports(const std::vector<EvaluationReport>& reports);
std::string comparison_table(const Comparison& c);
std::string comparison_csv(const Comparison& c);

}  // namespace ocpose
