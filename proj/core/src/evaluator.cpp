#include "ocpose/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ocpose/errors.hpp"

namespace ocpose {

using ordered_json = nlohmann::ordered_json;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to per-index slots; no ordering is implied.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

RankingOptions ranking_options(const EvaluationOptions& o) {
  return RankingOptions{o.ignore_mode, o.bbox_expand, o.interpolation};
}

const char* to_string(IgnoreMode m) { return m == IgnoreMode::kBbox ? "bbox" : "mask"; }
const char* to_string(ApInterpolation i) { return i == ApInterpolation::kCoco101 ? "coco101" : "envelope"; }
const char* to_string(Aggregation a) { return a == Aggregation::kPerImage ? "per-image" : "pooled"; }

ImageResult image_result(const Scene& scene, const CostMatrix& costs, const MatchPlan& plan) {
  ImageResult r;
  r.image_id = scene.image_id;
  r.ocpose = plan.ocpose();
  r.pi_one_size = plan.pi_one_size;
  r.pi_one_cost = plan.pi_one_cost;
  r.fp = plan.false_positives;
  r.fn = plan.false_negatives;
  r.crowd_matches = plan.crowd_matches;
  r.detections = costs.detections();
  for (const MatchPair& p : plan.pairs) {
    PairRecord rec;
    if (!p.dummy_detection()) rec.detection = scene.detections[p.detection].input_index;
    if (p.dummy_gt()) {
      rec.target = "dummy";
    } else {
      const GroundTruthEntry& gt = scene.gts[costs.gt_index()[p.column]];
      rec.gt = gt.id();
      rec.target = ocpose::to_string(gt.kind());
    }
    rec.cost = p.cost;
    rec.counted = p.in_pi_one;
    r.pairs.push_back(std::move(rec));
  }
  return r;
}

// Per-scene data that does not depend on the confidence threshold, for
// scenes whose detections are sorted by descending score.
struct ScenePrep {
  CostMatrix costs;
  SceneSimilarities sims;
};

std::size_t kept_count(const Scene& scene, double threshold) {
  return static_cast<std::size_t>(std::count_if(scene.detections.begin(), scene.detections.end(),
                                                [&](const DetectionPose& d) { return d.score >= threshold; }));
}

void fill_aggregate(EvaluationReport& report, std::span<const MatchPlan> plans,
                    const std::vector<std::vector<LabeledDetection>>& labels_per_threshold,
                    std::size_t gt_poses, ApInterpolation interpolation) {
  const OcposeAggregate agg = ocpose_score(plans);
  report.ocpose_pooled = agg.pooled;
  report.ocpose_per_image_mean = agg.per_image_mean;
  report.images_counted = agg.images_counted;
  report.pi_one_size = agg.pi_one_size;
  report.pi_one_cost = agg.pi_one_cost;
  report.ocpose = report.options.aggregation == Aggregation::kPerImage ? agg.per_image_mean : agg.pooled;
  report.map = 0.0;
  report.ap_per_threshold.clear();
  const auto thresholds = oks_thresholds();
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const PrCurve c = average_precision(labels_per_threshold[t], gt_poses, interpolation);
    report.ap_per_threshold.push_back({thresholds[t], c.ap, c.tp_count, c.fp_count, c.ignored_count});
    report.map += c.ap;
  }
  report.map /= static_cast<double>(thresholds.size());
  for (const ImageResult& r : report.per_image) {
    report.total_fp += r.fp;
    report.total_fn += r.fn;
    report.total_crowd_matches += r.crowd_matches;
  }
}

// Evaluates scenes restricted to their first `limits[i]` detections.
EvaluationReport evaluate_prepared(std::span<const Scene> scenes, const std::vector<ScenePrep>& prep,
                                   const std::vector<std::size_t>& limits, const EvaluationOptions& options) {
  EvaluationReport report;
  report.options = options;
  const std::size_t n = scenes.size();
  std::vector<MatchPlan> plans(n);
  std::vector<CostMatrix> used(n);
  const MatchOptions match_options{options.exclude_crowd_matches};
  parallel_for(n, options.jobs, [&](std::size_t i) {
    used[i] = prep[i].costs.head(limits[i]);
    plans[i] = solve_transport(used[i], match_options);
  });
  std::size_t gt_poses = 0;
  for (std::size_t i = 0; i < n; ++i) {
    report.per_image.push_back(image_result(scenes[i], used[i], plans[i]));
    gt_poses += scenes[i].count(GtKind::kPose);
  }
  const auto thresholds = oks_thresholds();
  std::vector<std::vector<LabeledDetection>> labels(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      auto l = greedy_match(prep[i].sims, thresholds[t], limits[i]);
      labels[t].insert(labels[t].end(), l.begin(), l.end());
    }
  }
  fill_aggregate(report, plans, labels, gt_poses, options.interpolation);
  return report;
}

std::vector<ScenePrep> prepare(std::span<const Scene> scenes, const EvaluationOptions& options) {
  std::vector<std::optional<ScenePrep>> slots(scenes.size());
  const RankingOptions ro = ranking_options(options);
  parallel_for(scenes.size(), options.jobs, [&](std::size_t i) {
    slots[i].emplace(ScenePrep{build_cost_matrix(scenes[i], options.sigmas),
                               SceneSimilarities(scenes[i], options.sigmas, ro)});
  });
  std::vector<ScenePrep> out;
  out.reserve(scenes.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void check_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw UsageError("confidence thresholds must lie in [0, 1]");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

LoadedInputs load_inputs(const std::string& gt_path, const std::string& det_path, const SigmaTable& sigmas) {
  LoadedInputs in;
  in.gt = load_ground_truth(gt_path, sigmas.size());
  in.detections = load_detections(det_path, -std::numeric_limits<double>::infinity(), sigmas.size());
  in.gt_source = gt_path;
  in.dt_source = det_path;
  return in;
}

std::vector<Scene> attach_detections(const GroundTruthSet& gt, const DetectionSet& detections, double threshold) {
  std::vector<Scene> scenes = gt.scenes;
  std::map<ImageId, std::size_t> index;
  for (std::size_t i = 0; i < scenes.size(); ++i) index[scenes[i].image_id] = i;
  std::vector<ImageId> unknown;
  for (const auto& [id, dets] : detections.by_image) {
    const auto it = index.find(id);
    if (it == index.end()) {
      unknown.push_back(id);
      continue;
    }
    for (const DetectionPose& d : dets) {
      if (d.score >= threshold) scenes[it->second].detections.push_back(d);
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) {
      list += (i ? ", " : "") + std::to_string(unknown[i]);
    }
    if (unknown.size() > 10) list += ", ...";
    throw ReferenceError(std::to_string(unknown.size()) + " detection image id(s) not in the ground truth: " + list);
  }
  return scenes;
}

EvaluationReport evaluate_scenes(std::span<const Scene> scenes, const EvaluationOptions& options) {
  const std::vector<ScenePrep> prep = prepare(scenes, options);
  std::vector<std::size_t> limits;
  for (const Scene& s : scenes) limits.push_back(s.detections.size());
  EvaluationReport report = evaluate_prepared(scenes, prep, limits, options);
  for (const Scene& s : scenes) {
    report.detections_kept += s.detections.size();
    report.detections_read += s.detections.size();
  }
  return report;
}

EvaluationReport evaluate_inputs(const LoadedInputs& inputs, const EvaluationOptions& options) {
  check_threshold(options.threshold);
  const std::vector<Scene> scenes = attach_detections(inputs.gt, inputs.detections, options.threshold);
  EvaluationReport report = evaluate_scenes(scenes, options);
  report.gt_source = inputs.gt_source;
  report.dt_source = inputs.dt_source;
  report.annotation_counts = inputs.gt.counts;
  report.detections_read = inputs.detections.read;
  report.detections_rejected = inputs.detections.rejected_non_finite;
  report.detections_below_threshold = inputs.detections.kept() - report.detections_kept;
  return report;
}

EvaluationReport evaluate(const std::string& gt_path, const std::string& det_path,
                          const EvaluationOptions& options) {
  return evaluate_inputs(load_inputs(gt_path, det_path, options.sigmas), options);
}

std::string report_to_json(const EvaluationReport& r) {
  const EvaluationOptions& o = r.options;
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = {{"name", "ocpose"}, {"version", kToolVersion}};
  ordered_json oks = ordered_json::array();
  for (double t : oks_thresholds()) oks.push_back(t);
  doc["config"] = {{"gt", r.gt_source},
                   {"dt", r.dt_source},
                   {"threshold", o.threshold},
                   {"sigmas", o.sigmas.values()},
                   {"sigma_digest", o.sigmas.digest()},
                   {"bbox_expand", o.bbox_expand},
                   {"exclude_crowd_matches", o.exclude_crowd_matches},
                   {"ignore_mode", to_string(o.ignore_mode)},
                   {"ap_interpolation", to_string(o.interpolation)},
                   {"aggregation", to_string(o.aggregation)},
                   {"oks_thresholds", oks},
                   {"solver", kSolverId}};
  doc["inputs"] = {{"images", r.per_image.size()},
                   {"annotations",
                    {{"pose", r.annotation_counts.pose},
                     {"mask", r.annotation_counts.mask},
                     {"crowd", r.annotation_counts.crowd},
                     {"dropped", r.annotation_counts.dropped}}},
                   {"detections",
                    {{"read", r.detections_read},
                     {"kept", r.detections_kept},
                     {"below_threshold", r.detections_below_threshold},
                     {"rejected_non_finite", r.detections_rejected}}}};
  ordered_json aps = ordered_json::array();
  for (const ApAtThreshold& a : r.ap_per_threshold) {
    aps.push_back({{"oks_threshold", a.oks_threshold}, {"ap", a.ap}, {"tp", a.tp}, {"fp", a.fp}, {"ignored", a.ignored}});
  }
  doc["aggregate"] = {{"ocpose", r.ocpose},
                      {"ocpose_pooled", r.ocpose_pooled},
                      {"ocpose_per_image_mean", r.ocpose_per_image_mean},
                      {"images_counted", r.images_counted},
                      {"pi_one_size", r.pi_one_size},
                      {"pi_one_cost", r.pi_one_cost},
                      {"map", r.map},
                      {"ap_per_threshold", aps},
                      {"total_fp", r.total_fp},
                      {"total_fn", r.total_fn},
                      {"total_crowd_matches", r.total_crowd_matches}};
  ordered_json images = ordered_json::array();
  for (const ImageResult& img : r.per_image) {
    ordered_json pairs = ordered_json::array();
    for (const PairRecord& p : img.pairs) {
      ordered_json jp;
      jp["detection"] = p.detection ? ordered_json(*p.detection) : ordered_json();
      jp["gt"] = p.gt ? ordered_json(*p.gt) : ordered_json();
      jp["target"] = p.target;
      jp["cost"] = p.cost;
      jp["counted"] = p.counted;
      pairs.push_back(std::move(jp));
    }
    images.push_back({{"image_id", img.image_id},
                      {"ocpose", img.ocpose},
                      {"pi_one_size", img.pi_one_size},
                      {"pi_one_cost", img.pi_one_cost},
                      {"fp", img.fp},
                      {"fn", img.fn},
                      {"crowd_matches", img.crowd_matches},
                      {"detections", img.detections},
                      {"matched_pairs", std::move(pairs)}});
  }
  doc["per_image"] = std::move(images);
  return doc.dump(2) + "\n";
}

std::string per_image_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "image_id,ocpose,pi_one_size,pi_one_cost,fp,fn,crowd_matches,detections\n";
  for (const ImageResult& r : report.per_image) {
    out << r.image_id << ',' << fmt(r.ocpose) << ',' << r.pi_one_size << ',' << fmt(r.pi_one_cost) << ','
        << r.fp << ',' << r.fn << ',' << r.crowd_matches << ',' << r.detections << '\n';
  }
  return out.str();
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 95; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

SweepResult sweep_inputs(const LoadedInputs& inputs, std::vector<double> grid, const EvaluationOptions& options) {
  if (grid.empty()) throw UsageError("sweep grid is empty");
  for (double t : grid) check_threshold(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Parse once at the lowest threshold; every grid point is then a
  // prefix of each score-sorted scene.
  const std::vector<Scene> scenes = attach_detections(inputs.gt, inputs.detections, grid.front());
  const std::vector<ScenePrep> prep = prepare(scenes, options);
  SweepResult result;
  for (double t : grid) {
    std::vector<std::size_t> limits;
    std::size_t kept = 0;
    for (const Scene& s : scenes) {
      limits.push_back(kept_count(s, t));
      kept += limits.back();
    }
    EvaluationOptions at = options;
    at.threshold = t;
    const EvaluationReport r = evaluate_prepared(scenes, prep, limits, at);
    result.grid.push_back({t, r.ocpose_pooled, r.ocpose_per_image_mean, r.map, kept});
  }
  result.argmin_threshold = result.grid.front().threshold;
  result.argmin_ocpose = result.grid.front().ocpose;
  for (const SweepPoint& p : result.grid) {
    if (p.ocpose < result.argmin_ocpose) {
      result.argmin_ocpose = p.ocpose;
      result.argmin_threshold = p.threshold;
    }
  }
  return result;
}

SweepResult sweep(const std::string& gt_path, const std::string& det_path, std::vector<double> grid,
                  const EvaluationOptions& options) {
  if (grid.empty()) throw UsageError("sweep grid is empty");
  return sweep_inputs(load_inputs(gt_path, det_path, options.sigmas), std::move(grid), options);
}

std::string sweep_to_json(const SweepResult& result, const EvaluationOptions& options) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = {{"name", "ocpose"}, {"version", kToolVersion}};
  doc["config"] = {{"sigma_digest", options.sigmas.digest()},
                   {"bbox_expand", options.bbox_expand},
                   {"exclude_crowd_matches", options.exclude_crowd_matches},
                   {"ignore_mode", to_string(options.ignore_mode)},
                   {"ap_interpolation", to_string(options.interpolation)},
                   {"solver", kSolverId}};
  ordered_json grid = ordered_json::array();
  for (const SweepPoint& p : result.grid) {
    grid.push_back({{"threshold", p.threshold},
                    {"ocpose", p.ocpose},
                    {"ocpose_per_image_mean", p.ocpose_per_image_mean},
                    {"map", p.map},
                    {"kept_detections", p.kept_detections}});
  }
  doc["grid"] = std::move(grid);
  doc["argmin_threshold"] = result.argmin_threshold;
  doc["argmin_ocpose"] = result.argmin_ocpose;
  return doc.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "threshold,ocpose,ocpose_per_image_mean,map,kept_detections\n";
  for (const SweepPoint& p : result.grid) {
    out << fixed2(p.threshold) << ',' << fmt(p.ocpose) << ',' << fmt(p.ocpose_per_image_mean) << ','
        << fmt(p.map) << ',' << p.kept_detections << '\n';
  }
  return out.str();
}

std::vector<PrCurveSet> pr_curves(const LoadedInputs& inputs, std::vector<double> confidence_thresholds,
                                  const EvaluationOptions& options) {
  if (confidence_thresholds.empty()) throw UsageError("no confidence thresholds given");
  std::vector<PrCurveSet> out;
  for (double t : confidence_thresholds) {
    check_threshold(t);
    const std::vector<Scene> scenes = attach_detections(inputs.gt, inputs.detections, t);
    PrCurveSet set;
    set.confidence_threshold = t;
    set.curves = mean_average_precision(scenes, options.sigmas, ranking_options(options));
    for (const Scene& s : scenes) set.kept_detections += s.detections.size();
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<std::string> write_pr_curves(const std::vector<PrCurveSet>& sets, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::vector<std::string> written;
  std::ostringstream summary;
  summary << "confidence_threshold,ap,fp_count,ap50,tp_count,kept_detections\n";
  for (const PrCurveSet& set : sets) {
    for (const PrCurve& c : set.curves.curves) {
      std::ostringstream csv;
      csv << "rank,score,recall,precision,interpolated_precision\n";
      for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const PrSample& s = c.samples[i];
        csv << i + 1 << ',' << fmt(s.score) << ',' << fmt(s.recall) << ',' << fmt(s.precision) << ','
            << fmt(s.interpolated_precision) << '\n';
      }
      const std::string path =
          join(out_dir, "pr_t" + fixed2(set.confidence_threshold) + "_oks" + fixed2(c.oks_threshold) + ".csv");
      write_text_file(path, csv.str());
      written.push_back(path);
    }
    const PrCurve& at50 = set.curves.curves.front();
    summary << fixed2(set.confidence_threshold) << ',' << fmt(set.curves.map) << ',' << at50.fp_count << ','
            << fmt(at50.ap) << ',' << at50.tp_count << ',' << set.kept_detections << '\n';
  }
  const std::string summary_path = join(out_dir, "pr_summary.csv");
  write_text_file(summary_path, summary.str());
  written.push_back(summary_path);
  const std::string svg_path = join(out_dir, "pr_curves.svg");
  write_text_file(svg_path, pr_curves_svg(sets));
  written.push_back(svg_path);
  return written;
}

std::vector<std::string> emit_pr_curves(const std::string& gt_path, const std::string& det_path,
                                        std::vector<double> confidence_thresholds, const std::string& out_dir,
                                        const EvaluationOptions& options) {
  const LoadedInputs inputs = load_inputs(gt_path, det_path, options.sigmas);
  return write_pr_curves(pr_curves(inputs, std::move(confidence_thresholds), options), out_dir);
}

std::string pr_curves_svg(const std::vector<PrCurveSet>& sets) {
  constexpr double kW = 640, kH = 480, kLeft = 60, kRight = 160, kTop = 30, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  auto px = [&](double r) { return kLeft + r * pw; };
  auto py = [&](double p) { return kTop + (1.0 - p) * ph; };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"18\">Precision-recall, OKS 0.50</text>\n";
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    svg << "<line x1=\"" << px(v) << "\" y1=\"" << py(0) << "\" x2=\"" << px(v) << "\" y2=\"" << py(1)
        << "\" stroke=\"#eee\"/>\n";
    svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(v) << "\" x2=\"" << px(1) << "\" y2=\"" << py(v)
        << "\" stroke=\"#eee\"/>\n";
    svg << "<text x=\"" << px(v) << "\" y=\"" << py(0) + 16 << "\" text-anchor=\"middle\">" << fixed2(v)
        << "</text>\n";
    svg << "<text x=\"" << px(0) - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << fixed2(v)
        << "</text>\n";
  }
  svg << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << px(0.5) << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">recall</text>\n";
  svg << "<text x=\"14\" y=\"" << py(0.5) << "\" transform=\"rotate(-90 14 " << py(0.5)
      << ")\" text-anchor=\"middle\">precision</text>\n";
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const char* color = kColors[k % 10];
    const PrCurve& c = sets[k].curves.curves.front();
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    double prev_r = 0.0;
    if (!c.samples.empty()) svg << px(0) << ',' << py(c.samples.front().precision) << ' ';
    for (const PrSample& s : c.samples) {
      svg << px(prev_r) << ',' << py(s.precision) << ' ' << px(s.recall) << ',' << py(s.precision) << ' ';
      prev_r = s.recall;
    }
    if (!c.samples.empty()) svg << px(prev_r) << ',' << py(0);
    svg << "\"/>\n";
    const double ly = kTop + 20.0 * static_cast<double>(k);
    svg << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kW - kRight + 32 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kW - kRight + 38 << "\" y=\"" << ly + 4 << "\">T=" << fixed2(sets[k].confidence_threshold)
        << " AP=" << fixed2(c.ap) << " FP=" << c.fp_count << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

bool rank_disagreement(const CompareRow& a, const CompareRow& b) {
  if (a.ocpose < b.ocpose) return !(a.map > b.map);
  if (b.ocpose < a.ocpose) return !(b.map > a.map);
  return false;
}

Comparison compare_reports(const std::vector<EvaluationReport>& reports) {
  if (reports.size() < 2) throw UsageError("compare needs at least two prediction files");
  Comparison c;
  for (const EvaluationReport& r : reports) {
    const std::size_t fp50 = r.ap_per_threshold.empty() ? 0 : r.ap_per_threshold.front().fp;
    c.rows.push_back({r.dt_source, r.map, r.ocpose_pooled, r.ocpose_per_image_mean, r.detections_kept, fp50});
  }
  for (std::size_t a = 0; a < c.rows.size(); ++a) {
    for (std::size_t b = a + 1; b < c.rows.size(); ++b) {
      c.flags.push_back({a, b, rank_disagreement(c.rows[a], c.rows[b])});
    }
  }
  return c;
}

Comparison compare(const std::string& gt_path, const std::vector<std::string>& det_paths,
                   const EvaluationOptions& options) {
  if (det_paths.size() < 2) throw UsageError("compare needs at least two prediction files");
  const GroundTruthSet gt = load_ground_truth(gt_path, options.sigmas.size());
  std::vector<EvaluationReport> reports;
  for (const std::string& path : det_paths) {
    LoadedInputs in;
    in.gt = gt;
    in.detections = load_detections(path, -std::numeric_limits<double>::infinity(), options.sigmas.size());
    in.gt_source = gt_path;
    in.dt_source = path;
    reports.push_back(evaluate_inputs(in, options));
  }
  return compare_reports(reports);
}

std::string comparison_table(const Comparison& c) {
  std::size_t width = 6;
  for (const CompareRow& r : c.rows) width = std::max(width, r.source.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %8s  %8s  %8s  %8s\n", static_cast<int>(width), "method", "mAP",
                "OCpose", "kept", "FP@0.5");
  out << line;
  for (const CompareRow& r : c.rows) {
    std::snprintf(line, sizeof line, "%-*s  %8.4f  %8.4f  %8zu  %8zu\n", static_cast<int>(width),
                  r.source.c_str(), r.map, r.ocpose, r.kept_detections, r.fp);
    out << line;
  }
  for (const CompareFlag& f : c.flags) {
    if (!f.disagree) continue;
    out << "rank disagreement: " << c.rows[f.a].source << " vs " << c.rows[f.b].source
        << " (mAP and OCpose prefer different methods)\n";
  }
  return out.str();
}

std::string comparison_csv(const Comparison& c) {
  std::ostringstream out;
  out << "method,map,ocpose,ocpose_per_image_mean,kept_detections,fp_at_050,disagrees_with\n";
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const CompareRow& r = c.rows[i];
    std::string others;
    for (const CompareFlag& f : c.flags) {
      if (!f.disagree || (f.a != i && f.b != i)) continue;
      if (!others.empty()) others += ';';
      others += std::to_string(f.a == i ? f.b : f.a);
    }
    out << '"' << r.source << "\"," << fmt(r.map) << ',' << fmt(r.ocpose) << ',' << fmt(r.ocpose_per_image_mean)
        << ',' << r.kept_detections << ',' << r.fp << ',' << others << '\n';
  }
  return out.str();
}

}  // namespace ocpose
