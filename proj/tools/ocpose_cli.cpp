// ocpose: command-line front end for the OCpose evaluator.
//
//   ocpose evaluate --gt gt.json --dt results.json [--threshold 0.3]
//   ocpose sweep    --gt gt.json --dt results.json [--grid 0,0.1,0.2]
//   ocpose pr-curve --gt gt.json --dt results.json --out dir [--thresholds 0,0.3]
//   ocpose compare  --gt gt.json --dt a.json --dt b.json
//   ocpose synth    --out dir [--images 10 --seed 7 ...]
//
// Reports go to stdout (or --out), diagnostics to stderr.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ocpose/dataset_io.hpp"
#include "ocpose/errors.hpp"
#include "ocpose/evaluator.hpp"
#include "ocpose/synthetic.hpp"

namespace {

struct CommonArgs {
  std::string gt;
  std::vector<std::string> dt;
  double threshold = 0.0;
  std::string sigmas;
  double bbox_expand = 1.0;
  bool exclude_crowd_matches = false;
  std::string aggregation = "pooled";
  std::string ignore_mode = "mask";
  std::string interpolation = "envelope";
  std::size_t jobs = 1;
  std::string out;
  bool csv = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool many_dt) {
  cmd->add_option("--gt", a.gt, "COCO keypoint ground-truth JSON")->required();
  if (many_dt) {
    cmd->add_option("--dt", a.dt, "COCO results JSON (repeatable)")->required();
  } else {
    cmd->add_option("--dt", a.dt, "COCO results JSON")->required()->expected(1);
  }
  cmd->add_option("--threshold", a.threshold, "detection confidence threshold")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--sigmas", a.sigmas, "JSON list of per-keypoint constants k_n");
  cmd->add_option("--bbox-expand", a.bbox_expand, "expansion of ignore boxes in bbox mode")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--exclude-crowd-matches", a.exclude_crowd_matches,
                "leave detection-to-crowd pairs out of the averaged set");
  cmd->add_option("--aggregation", a.aggregation, "headline OCpose")
      ->check(CLI::IsMember({"pooled", "per-image"}));
  cmd->add_option("--ignore-mode", a.ignore_mode, "ignore-region similarity for AP")
      ->check(CLI::IsMember({"mask", "bbox"}));
  cmd->add_option("--ap-interpolation", a.interpolation, "AP integration")
      ->check(CLI::IsMember({"envelope", "coco101"}));
  cmd->add_option("--jobs", a.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  cmd->add_option("--out", a.out, "output directory (stdout if omitted)");
  cmd->add_flag("--csv", a.csv, "print CSV instead of JSON / text");
}

ocpose::EvaluationOptions options_from(const CommonArgs& a) {
  ocpose::EvaluationOptions o;
  o.threshold = a.threshold;
  if (!a.sigmas.empty()) o.sigmas = ocpose::SigmaTable::from_json_file(a.sigmas);
  o.bbox_expand = a.bbox_expand;
  o.exclude_crowd_matches = a.exclude_crowd_matches;
  o.aggregation = a.aggregation == "per-image" ? ocpose::Aggregation::kPerImage : ocpose::Aggregation::kPooled;
  o.ignore_mode = a.ignore_mode == "bbox" ? ocpose::IgnoreMode::kBbox : ocpose::IgnoreMode::kMask;
  o.interpolation =
      a.interpolation == "coco101" ? ocpose::ApInterpolation::kCoco101 : ocpose::ApInterpolation::kEnvelope;
  o.jobs = a.jobs;
  return o;
}

void emit(const std::string& out_dir, const std::string& name, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ocpose::IoError("cannot create directory " + out_dir + ": " + ec.message());
  const std::string path = (std::filesystem::path(out_dir) / name).string();
  ocpose::write_text_file(path, text);
  std::cerr << "wrote " << path << '\n';
}

void print_summary(const ocpose::EvaluationReport& r) {
  std::cerr << "images " << r.per_image.size() << ", detections kept " << r.detections_kept << " of "
            << r.detections_read << ", OCpose " << r.ocpose << " (pooled " << r.ocpose_pooled
            << ", per-image " << r.ocpose_per_image_mean << "), mAP " << r.map << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OCpose: optimal-transport evaluation of multi-person pose estimates"};
  app.set_version_flag("--version", ocpose::kToolVersion);
  app.require_subcommand(1);

  CommonArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "score one results file");
  add_common(eval_cmd, eval_args, false);

  CommonArgs sweep_args;
  std::vector<double> grid;
  auto* sweep_cmd = app.add_subcommand("sweep", "find the confidence threshold minimizing OCpose");
  add_common(sweep_cmd, sweep_args, false);
  sweep_cmd->add_option("--grid", grid, "thresholds (default 0.00..0.95 step 0.01)")->delimiter(',');

  CommonArgs pr_args;
  std::vector<double> pr_thresholds;
  auto* pr_cmd = app.add_subcommand("pr-curve", "write precision-recall curves per confidence threshold");
  add_common(pr_cmd, pr_args, false);
  pr_cmd->add_option("--thresholds", pr_thresholds, "confidence thresholds")->delimiter(',');

  CommonArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "compare mAP and OCpose across results files");
  add_common(cmp_cmd, cmp_args, true);

  ocpose::SyntheticSpec spec;
  std::size_t images = 10;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic GT / results pair");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--images", images, "number of images")->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
  synth_cmd->add_option("--seed", spec.seed, "random seed");
  synth_cmd->add_option("--gt-poses", spec.gt_poses, "GT poses per image");
  synth_cmd->add_option("--mask-only", spec.mask_only_people, "mask-only people per image");
  synth_cmd->add_option("--crowds", spec.crowds, "crowd regions per image");
  synth_cmd->add_option("--jittered", spec.jittered, "jittered detections per image");
  synth_cmd->add_option("--duplicates", spec.duplicates, "duplicate detections per image");
  synth_cmd->add_option("--crowd-detections", spec.detections_per_crowd, "detections inside each crowd");
  synth_cmd->add_option("--far-fps", spec.far_false_positives, "far false positives per image");
  synth_cmd->add_option("--far-fp-score", spec.far_fp_score, "score of far false positives");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ocpose::exit_code_for(ocpose::ErrorCategory::kUsage);
  }

  try {
    if (*eval_cmd) {
      const auto opts = options_from(eval_args);
      const auto report = ocpose::evaluate(eval_args.gt, eval_args.dt.front(), opts);
      print_summary(report);
      if (eval_args.csv) {
        emit(eval_args.out, "per_image.csv", ocpose::per_image_csv(report));
      } else {
        emit(eval_args.out, "report.json", ocpose::report_to_json(report));
        if (!eval_args.out.empty()) emit(eval_args.out, "per_image.csv", ocpose::per_image_csv(report));
      }
    } else if (*sweep_cmd) {
      const auto opts = options_from(sweep_args);
      if (grid.empty() && sweep_cmd->count("--grid") == 0) grid = ocpose::default_sweep_grid();
      const auto result = ocpose::sweep(sweep_args.gt, sweep_args.dt.front(), grid, opts);
      std::cerr << "argmin threshold " << result.argmin_threshold << ", OCpose " << result.argmin_ocpose << '\n';
      if (sweep_args.csv) {
        emit(sweep_args.out, "sweep.csv", ocpose::sweep_csv(result));
      } else {
        emit(sweep_args.out, "sweep.json", ocpose::sweep_to_json(result, opts));
        if (!sweep_args.out.empty()) emit(sweep_args.out, "sweep.csv", ocpose::sweep_csv(result));
      }
    } else if (*pr_cmd) {
      if (pr_args.out.empty()) throw ocpose::UsageError("pr-curve needs --out");
      const auto opts = options_from(pr_args);
      if (pr_thresholds.empty()) pr_thresholds = {opts.threshold};
      for (const auto& path :
           ocpose::emit_pr_curves(pr_args.gt, pr_args.dt.front(), pr_thresholds, pr_args.out, opts)) {
        std::cerr << "wrote " << path << '\n';
      }
    } else if (*cmp_cmd) {
      const auto opts = options_from(cmp_args);
      const auto c = ocpose::compare(cmp_args.gt, cmp_args.dt, opts);
      if (cmp_args.csv) {
        emit(cmp_args.out, "compare.csv", ocpose::comparison_csv(c));
      } else {
        emit(cmp_args.out, "compare.txt", ocpose::comparison_table(c));
        if (!cmp_args.out.empty()) emit(cmp_args.out, "compare.csv", ocpose::comparison_csv(c));
      }
    } else if (*synth_cmd) {
      const auto scenes = ocpose::generate_synthetic_dataset(spec, images);
      std::vector<ocpose::DetectionPose> dets;
      for (const auto& s : scenes) dets.insert(dets.end(), s.detections.begin(), s.detections.end());
      emit(synth_out, "gt.json", ocpose::serialize_ground_truth(scenes));
      emit(synth_out, "dt.json", ocpose::serialize_detections(dets));
    }
  } catch (const ocpose::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ocpose::exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ocpose::exit_code_for(ocpose::ErrorCategory::kData);
  }
  return 0;
}
