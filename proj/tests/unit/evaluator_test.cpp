#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "ocpose/errors.hpp"
#include "ocpose/evaluator.hpp"
#include "ocpose/ranking.hpp"

namespace ocpose {
namespace {

using json = nlohmann::json;
using testing::TempDir;
using testing::write_scenes;

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// One GT pose per image, its exact detection at 0.9, and one far false
// positive at 0.05 in each of the five images.
std::vector<Scene> low_score_fp_scenes() {
  SyntheticSpec spec;
  spec.gt_poses = 1;
  spec.far_false_positives = 1;
  spec.far_fp_score = 0.05;
  spec.seed = 5;
  return generate_synthetic_dataset(spec, 5);
}

TEST(Evaluate, PerfectScenes) {
  TempDir dir("eval");
  const auto dt = write_scenes(dir, "p", testing::perfect_ten());
  const auto r = evaluate(dir.file("p_gt.json"), dt, {});
  EXPECT_EQ(r.ocpose_pooled, 0.0);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.per_image.size(), 10u);
}

TEST(Evaluate, GroundTruthOnly) {
  TempDir dir("gtonly");
  auto scenes = testing::perfect_ten();
  dir.write("gt.json", serialize_ground_truth(scenes));
  dir.write("dt.json", "[]");
  const auto r = evaluate(dir.file("gt.json"), dir.file("dt.json"), {});
  EXPECT_EQ(r.ocpose_pooled, 1.0);
  EXPECT_EQ(r.ocpose_per_image_mean, 1.0);
  for (const auto& img : r.per_image) EXPECT_EQ(img.ocpose, 1.0);
  EXPECT_EQ(r.total_fn, 10u);
}

TEST(Evaluate, FpInjectionFixture) {
  TempDir dir("inject");
  const auto injected = inject_far_false_positives(testing::perfect_ten(), 10, 0.01, SigmaTable::coco());
  const auto dt = write_scenes(dir, "i", injected);
  const auto r = evaluate(dir.file("i_gt.json"), dt, {});
  EXPECT_NEAR(r.ocpose_pooled, 0.5, 1e-12);
  EXPECT_EQ(r.total_fp, 10u);
}

TEST(Evaluate, UnknownImageIdsAreListed) {
  TempDir dir("unknown");
  auto scenes = testing::perfect_ten();
  write_scenes(dir, "u", scenes);
  auto dets = scenes[0].detections;
  dets[0].image_id = 777;
  dir.write("bad_dt.json", serialize_detections(dets));
  try {
    evaluate(dir.file("u_gt.json"), dir.file("bad_dt.json"), {});
    FAIL() << "expected a reference error";
  } catch (const ReferenceError& e) {
    EXPECT_NE(std::string(e.what()).find("777"), std::string::npos);
  }
}

TEST(Evaluate, SkeletonMismatchIsDataError) {
  TempDir dir("skeleton");
  const auto dt = write_scenes(dir, "s", testing::perfect_ten());
  EvaluationOptions o;
  o.sigmas = SigmaTable(std::vector<double>(14, 0.1));
  try {
    evaluate(dir.file("s_gt.json"), dt, o);
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kData);
  }
}

TEST(Evaluate, AggregateRecomputableFromPerImage) {
  SyntheticSpec spec;
  spec.gt_poses = 3;
  spec.jittered = 2;
  spec.duplicates = 2;
  spec.crowds = 1;
  spec.detections_per_crowd = 2;
  spec.seed = 23;
  const auto scenes = generate_synthetic_dataset(spec, 6);
  const auto r = evaluate_scenes(scenes, {});
  const json doc = json::parse(report_to_json(r));
  double cost = 0.0, mean = 0.0;
  std::size_t size = 0, counted = 0, fp = 0, fn = 0;
  for (const auto& img : doc["per_image"]) {
    cost += img["pi_one_cost"].get<double>();
    size += img["pi_one_size"].get<std::size_t>();
    fp += img["fp"].get<std::size_t>();
    fn += img["fn"].get<std::size_t>();
    if (img["pi_one_size"].get<std::size_t>() > 0) {
      mean += img["ocpose"].get<double>();
      ++counted;
    }
    double pair_sum = 0.0;
    for (const auto& p : img["matched_pairs"]) {
      if (p["counted"].get<bool>()) pair_sum += p["cost"].get<double>();
    }
    EXPECT_NEAR(pair_sum, img["pi_one_cost"].get<double>(), 1e-12);
  }
  EXPECT_NEAR(doc["aggregate"]["ocpose_pooled"].get<double>(), cost / static_cast<double>(size), 1e-12);
  EXPECT_NEAR(doc["aggregate"]["ocpose_per_image_mean"].get<double>(), mean / static_cast<double>(counted), 1e-12);
  EXPECT_EQ(doc["aggregate"]["total_fp"].get<std::size_t>(), fp);
  EXPECT_EQ(doc["aggregate"]["total_fn"].get<std::size_t>(), fn);
  EXPECT_EQ(doc["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(doc["config"]["solver"], kSolverId);
}

TEST(Evaluate, JobsDoNotChangeTheReport) {
  SyntheticSpec spec;
  spec.jittered = 2;
  spec.duplicates = 1;
  spec.crowds = 1;
  spec.detections_per_crowd = 1;
  spec.seed = 4;
  const auto scenes = generate_synthetic_dataset(spec, 12);
  EvaluationOptions one, eight;
  eight.jobs = 8;
  EXPECT_EQ(report_to_json(evaluate_scenes(scenes, one)), report_to_json(evaluate_scenes(scenes, eight)));
}

TEST(Evaluate, EmptySceneIsExcludedFromMean) {
  std::vector<Scene> scenes = testing::perfect_ten();
  scenes.resize(2);
  scenes[0].detections.clear();
  Scene empty;
  empty.image_id = 99;
  empty.image_size = {10, 10};
  scenes.push_back(empty);
  const auto r = evaluate_scenes(scenes, {});
  EXPECT_EQ(r.images_counted, 2u);
  EXPECT_DOUBLE_EQ(r.ocpose_per_image_mean, 0.5);
  EXPECT_EQ(r.per_image.back().ocpose, 0.0);
  EXPECT_EQ(r.per_image.back().pi_one_size, 0u);
}

TEST(Evaluate, HeadlineFollowsAggregation) {
  std::vector<Scene> scenes = testing::perfect_ten();
  scenes.resize(2);
  scenes[0].detections.push_back(scenes[0].detections[0]);
  scenes[0].detections.back().keypoints[0].x += 400;
  EvaluationOptions o;
  o.aggregation = Aggregation::kPerImage;
  const auto r = evaluate_scenes(scenes, o);
  EXPECT_EQ(r.ocpose, r.ocpose_per_image_mean);
  EXPECT_NE(r.ocpose, r.ocpose_pooled);
}

TEST(Sweep, SingletonGrid) {
  TempDir dir("sweep0");
  const auto dt = write_scenes(dir, "s", low_score_fp_scenes());
  const auto r = sweep(dir.file("s_gt.json"), dt, {0.0}, {});
  EXPECT_EQ(r.argmin_threshold, 0.0);
  ASSERT_EQ(r.grid.size(), 1u);
}

TEST(Sweep, DropsLowScoreFalsePositives) {
  TempDir dir("sweep1");
  const auto dt = write_scenes(dir, "s", low_score_fp_scenes());
  const auto r = sweep(dir.file("s_gt.json"), dt, {0.0, 0.1}, {});
  EXPECT_EQ(r.argmin_threshold, 0.1);
  EXPECT_EQ(r.argmin_ocpose, 0.0);
  EXPECT_NEAR(r.grid[0].ocpose, 0.5, 1e-12);
  EXPECT_EQ(r.grid[0].kept_detections, 10u);
  EXPECT_EQ(r.grid[1].kept_detections, 5u);
}

TEST(Sweep, ArgminIsGridMinimumAndMatchesSingleEvaluation) {
  TempDir dir("sweep2");
  SyntheticSpec spec;
  spec.jittered = 2;
  spec.duplicates = 2;
  spec.far_false_positives = 2;
  spec.seed = 8;
  const auto dt = write_scenes(dir, "s", generate_synthetic_dataset(spec, 5));
  const auto r = sweep(dir.file("s_gt.json"), dt, default_sweep_grid(), {});
  double best = 2.0;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    best = std::min(best, r.grid[i].ocpose);
    if (i) EXPECT_LT(r.grid[i - 1].threshold, r.grid[i].threshold);
  }
  EXPECT_EQ(r.argmin_ocpose, best);
  EvaluationOptions at;
  at.threshold = r.argmin_threshold;
  const auto single = evaluate(dir.file("s_gt.json"), dt, at);
  EXPECT_EQ(single.ocpose_pooled, r.argmin_ocpose);
  for (const SweepPoint& p : r.grid) {
    EvaluationOptions o;
    o.threshold = p.threshold;
    const auto e = evaluate(dir.file("s_gt.json"), dt, o);
    EXPECT_EQ(e.ocpose_pooled, p.ocpose) << p.threshold;
    EXPECT_EQ(e.map, p.map) << p.threshold;
  }
}

TEST(Sweep, EmptyGridIsUsageError) {
  TempDir dir("sweep3");
  const auto dt = write_scenes(dir, "s", low_score_fp_scenes());
  EXPECT_THROW(sweep(dir.file("s_gt.json"), dt, {}, {}), UsageError);
  EXPECT_THROW(sweep(dir.file("s_gt.json"), dt, {1.5}, {}), UsageError);
}

TEST(PrCurves, PerfectPredictions) {
  TempDir dir("pr0");
  const auto dt = write_scenes(dir, "p", testing::perfect_ten());
  const auto files = emit_pr_curves(dir.file("p_gt.json"), dt, {0.0}, dir.file("out"), {});
  EXPECT_EQ(files.size(), 12u);
  const std::string csv = read(dir.file("out/pr_t0.00_oks0.50.csv"));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  double last_recall = 0.0;
  while (std::getline(in, line)) {
    std::vector<double> cols;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cols.push_back(std::stod(cell));
    EXPECT_EQ(cols[3], 1.0);
    last_recall = cols[2];
  }
  EXPECT_EQ(last_recall, 1.0);
  EXPECT_NE(read(dir.file("out/pr_curves.svg")).find("<svg"), std::string::npos);
}

TEST(PrCurves, InjectedFalsePositivesOnlyChangeTheFpColumn) {
  TempDir dir("pr1");
  const auto injected = inject_far_false_positives(testing::perfect_ten(), 10, 0.01, SigmaTable::coco());
  const auto dt = write_scenes(dir, "i", injected);
  LoadedInputs in = load_inputs(dir.file("i_gt.json"), dt, SigmaTable::coco());
  const auto sets = pr_curves(in, {0.3, 0.0}, {});
  EXPECT_EQ(sets[0].curves.map, sets[1].curves.map);
  EXPECT_EQ(sets[1].curves.curves.front().fp_count - sets[0].curves.curves.front().fp_count, 10u);
  write_pr_curves(sets, dir.file("out"));
  EXPECT_EQ(line_count(read(dir.file("out/pr_summary.csv"))), 3u);
}

TEST(PrCurves, EmptyDetectionsGiveHeaderOnlyFiles) {
  TempDir dir("pr2");
  dir.write("gt.json", serialize_ground_truth(testing::perfect_ten()));
  dir.write("dt.json", "[]");
  emit_pr_curves(dir.file("gt.json"), dir.file("dt.json"), {0.0}, dir.file("out"), {});
  EXPECT_EQ(read(dir.file("out/pr_t0.00_oks0.75.csv")), "rank,score,recall,precision,interpolated_precision\n");
}

TEST(PrCurves, UnwritableDirectoryIsIoError) {
  TempDir dir("pr3");
  const auto dt = write_scenes(dir, "p", testing::perfect_ten());
  dir.write("blocker", "x");
  try {
    emit_pr_curves(dir.file("p_gt.json"), dt, {0.0}, dir.file("blocker/sub"), {});
    FAIL() << "expected an IO error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kIo);
  }
}

TEST(Compare, FalsePositivesFlagDisagreement) {
  TempDir dir("cmp0");
  const auto perfect = testing::perfect_ten();
  const auto noisy = inject_far_false_positives(perfect, 30, 0.01, SigmaTable::coco());
  const auto a = write_scenes(dir, "a", noisy);
  const auto b = write_scenes(dir, "b", perfect);
  const Comparison c = compare(dir.file("a_gt.json"), {a, b}, {});
  ASSERT_EQ(c.rows.size(), 2u);
  EXPECT_GE(c.rows[0].map, c.rows[1].map);
  EXPECT_GT(c.rows[0].ocpose, c.rows[1].ocpose);
  ASSERT_EQ(c.flags.size(), 1u);
  EXPECT_TRUE(c.flags[0].disagree);
  EXPECT_NE(comparison_table(c).find("rank disagreement"), std::string::npos);
}

TEST(Compare, IdenticalFilesAgree) {
  TempDir dir("cmp1");
  const auto a = write_scenes(dir, "a", testing::perfect_ten());
  const Comparison c = compare(dir.file("a_gt.json"), {a, a}, {});
  EXPECT_EQ(c.rows[0].map, c.rows[1].map);
  EXPECT_EQ(c.rows[0].ocpose, c.rows[1].ocpose);
  EXPECT_FALSE(c.flags[0].disagree);
}

TEST(Compare, ThreeFilesGivePairwiseFlags) {
  TempDir dir("cmp2");
  const auto perfect = testing::perfect_ten();
  const auto a = write_scenes(dir, "a", perfect);
  const auto b = write_scenes(dir, "b", inject_far_false_positives(perfect, 5, 0.01, SigmaTable::coco()));
  const auto c3 = write_scenes(dir, "c", inject_far_false_positives(perfect, 20, 0.01, SigmaTable::coco()));
  const Comparison c = compare(dir.file("a_gt.json"), {a, b, c3}, {});
  EXPECT_EQ(c.rows.size(), 3u);
  EXPECT_EQ(c.flags.size(), 3u);
  EXPECT_EQ(line_count(comparison_csv(c)), 4u);
}

TEST(Compare, NeedsTwoFiles) {
  TempDir dir("cmp3");
  const auto a = write_scenes(dir, "a", testing::perfect_ten());
  EXPECT_THROW(compare(dir.file("a_gt.json"), {a}, {}), UsageError);
}

}  // namespace
}  // namespace ocpose
