#include "ocpose/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ocpose/errors.hpp"

namespace ocpose {

namespace {

// COCO joint order: nose, eyes, ears, shoulders, elbows, wrists, hips,
// knees, ankles (left before right).
constexpr Point2 kCocoTemplate[17] = {
    {0.50, 0.08}, {0.55, 0.06}, {0.45, 0.06}, {0.60, 0.08}, {0.40, 0.08}, {0.75, 0.22},
    {0.25, 0.22}, {0.85, 0.38}, {0.15, 0.38}, {0.90, 0.52}, {0.10, 0.52}, {0.65, 0.55},
    {0.35, 0.55}, {0.66, 0.75}, {0.34, 0.75}, {0.67, 0.95}, {0.33, 0.95}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool overlaps(const BBox& a, const BBox& b, double gap) {
  return a.x < b.x + b.w + gap && b.x < a.x + a.w + gap && a.y < b.y + b.h + gap &&
         b.y < a.y + a.h + gap;
}

BinaryMask box_mask(const BBox& box, MaskSize size) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(size.height * size.width), 0);
  for (std::int64_t r = 0; r < size.height; ++r) {
    for (std::int64_t c = 0; c < size.width; ++c) {
      const auto x = static_cast<double>(c);
      const auto y = static_cast<double>(r);
      if (x >= box.x && x <= box.x + box.w && y >= box.y && y <= box.y + box.h) {
        px[static_cast<std::size_t>(r * size.width + c)] = 1;
      }
    }
  }
  return BinaryMask(size, std::move(px));
}

class Placer {
 public:
  Placer(const SyntheticSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  // Integer-aligned box of the given size that keeps a 2 px gap to every
  // box placed so far.
  BBox place(double w, double h, const char* what) {
    const double max_x = static_cast<double>(spec_.image_size.width) - w - 2.0;
    const double max_y = static_cast<double>(spec_.image_size.height) - h - 2.0;
    if (max_x < 1.0 || max_y < 1.0) {
      throw GenerationError(std::string("image too small to place a ") + what);
    }
    std::uniform_real_distribution<double> ux(1.0, max_x), uy(1.0, max_y);
    for (std::size_t attempt = 0; attempt < spec_.max_attempts; ++attempt) {
      const BBox box{std::floor(ux(rng_)), std::floor(uy(rng_)), w, h};
      const bool clear = std::none_of(occupied_.begin(), occupied_.end(),
                                      [&](const BBox& o) { return overlaps(box, o, 2.0); });
      if (clear) {
        occupied_.push_back(box);
        return box;
      }
    }
    throw GenerationError(std::string("could not place a ") + what + " after " +
                          std::to_string(spec_.max_attempts) + " attempts");
  }

 private:
  const SyntheticSpec& spec_;
  std::mt19937_64& rng_;
  std::vector<BBox> occupied_;
};

}  // namespace

std::vector<Point2> pose_template(std::size_t keypoints) {
  if (keypoints == 17) return {std::begin(kCocoTemplate), std::end(kCocoTemplate)};
  // Other skeletons: points down the body on a narrow ellipse.
  std::vector<Point2> pts;
  for (std::size_t n = 0; n < keypoints; ++n) {
    const double t = keypoints > 1 ? static_cast<double>(n) / static_cast<double>(keypoints - 1) : 0.5;
    const double side = n % 2 == 0 ? -1.0 : 1.0;
    pts.push_back({0.5 + side * 0.3 * std::sin(t * 3.14159265358979), 0.05 + 0.9 * t});
  }
  return pts;
}

std::vector<DetKeypoint> place_pose(std::size_t keypoints, double x, double y, double height,
                                    double confidence) {
  std::vector<DetKeypoint> out;
  const double width = height / 2.0;
  for (const Point2& p : pose_template(keypoints)) {
    out.push_back({x + p.x * width, y + p.y * height, confidence});
  }
  return out;
}

Scene generate_synthetic_scene(const SyntheticSpec& spec) {
  if (spec.person_height_min <= 0.0 || spec.person_height_max < spec.person_height_min) {
    throw UsageError("synthetic person heights must satisfy 0 < min <= max");
  }
  if (spec.duplicates > 0 && spec.gt_poses == 0) {
    throw UsageError("duplicates need at least one GT pose");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uh(spec.person_height_min, spec.person_height_max);
  Placer placer(spec, rng);

  Scene scene;
  scene.image_id = spec.image_id;
  scene.image_size = spec.image_size;
  scene.file_name = "synthetic_" + std::to_string(spec.image_id) + ".jpg";
  AnnotationId next_id = spec.image_id * 1000;

  std::vector<std::vector<DetKeypoint>> gt_shapes;
  for (std::size_t g = 0; g < spec.gt_poses; ++g) {
    const double h = std::round(uh(rng));
    const BBox box = placer.place(h / 2.0, h, "GT pose");
    std::vector<DetKeypoint> shape = place_pose(spec.keypoints, box.x, box.y, h, 1.0);
    std::vector<GtKeypoint> kps;
    for (const auto& k : shape) kps.push_back({k.x, k.y, 2});
    scene.gts.push_back(GroundTruthEntry::pose(next_id++, std::move(kps), box, box.area()));
    gt_shapes.push_back(std::move(shape));
  }
  for (std::size_t m = 0; m < spec.mask_only_people; ++m) {
    const double h = std::round(uh(rng));
    const BBox box = placer.place(h / 2.0, h, "mask-only person");
    scene.gts.push_back(GroundTruthEntry::instance_mask(next_id++, box_mask(box, spec.image_size), box, box.area()));
  }
  std::vector<BBox> crowd_boxes;
  for (std::size_t c = 0; c < spec.crowds; ++c) {
    const double h = std::round(2.0 * spec.person_height_max);
    const BBox box = placer.place(1.5 * h, h, "crowd");
    scene.gts.push_back(GroundTruthEntry::crowd_mask(next_id++, box_mask(box, spec.image_size), box, box.area()));
    crowd_boxes.push_back(box);
  }

  std::normal_distribution<double> noise(0.0, spec.jitter_sigma);
  auto jittered = [&](const std::vector<DetKeypoint>& shape, double confidence) {
    std::vector<DetKeypoint> out = shape;
    for (auto& k : out) {
      k.x += noise(rng);
      k.y += noise(rng);
      k.confidence = confidence;
    }
    return out;
  };

  std::vector<DetectionPose> dets;
  auto add = [&](std::vector<DetKeypoint> kps, double score) {
    DetectionPose d;
    d.image_id = spec.image_id;
    d.keypoints = std::move(kps);
    d.score = score;
    dets.push_back(std::move(d));
  };

  for (std::size_t g = 0; g < gt_shapes.size(); ++g) {
    if (g < spec.jittered) {
      add(jittered(gt_shapes[g], 0.9), spec.jitter_score);
    } else {
      add(gt_shapes[g], spec.perfect_score);
    }
  }
  for (std::size_t d = 0; d < spec.duplicates; ++d) {
    add(jittered(gt_shapes[d % gt_shapes.size()], 0.7), spec.duplicate_score);
  }
  for (const BBox& crowd : crowd_boxes) {
    for (std::size_t d = 0; d < spec.detections_per_crowd; ++d) {
      const double h = std::min(crowd.h - 4.0, spec.person_height_max);
      std::uniform_real_distribution<double> ux(crowd.x + 2.0, crowd.x + crowd.w - h / 2.0 - 2.0);
      std::uniform_real_distribution<double> uy(crowd.y + 2.0, crowd.y + crowd.h - h - 2.0);
      add(place_pose(spec.keypoints, ux(rng), uy(rng), h, 1.0), spec.crowd_detection_score);
    }
  }
  for (std::size_t f = 0; f < spec.far_false_positives; ++f) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      const double h = uh(rng);
      const double max_x = static_cast<double>(spec.image_size.width) - h / 2.0 - 1.0;
      const double max_y = static_cast<double>(spec.image_size.height) - h - 1.0;
      if (max_x <= 0.0 || max_y <= 0.0) break;
      std::uniform_real_distribution<double> ux(0.0, max_x), uy(0.0, max_y);
      std::vector<DetKeypoint> kps = place_pose(spec.keypoints, ux(rng), uy(rng), h, 0.5);
      placed = std::all_of(scene.gts.begin(), scene.gts.end(), [&](const GroundTruthEntry& gt) {
        const double limit = spec.far_distance_factor * gt.scale();
        return std::all_of(kps.begin(), kps.end(), [&](const DetKeypoint& k) {
          return distance_to_bbox({k.x, k.y}, gt.bbox()) >= limit;
        });
      });
      if (placed) add(std::move(kps), spec.far_fp_score);
    }
    if (!placed) {
      throw GenerationError("could not place far false positive " + std::to_string(f) + " after " +
                            std::to_string(spec.max_attempts) + " attempts");
    }
  }

  std::stable_sort(dets.begin(), dets.end(),
                   [](const DetectionPose& a, const DetectionPose& b) { return a.score > b.score; });
  // Number detections in emitted order so a written results file reloads
  // to the same values.
  for (std::size_t i = 0; i < dets.size(); ++i) dets[i].input_index = i;
  scene.detections = std::move(dets);
  return scene;
}

std::vector<Scene> generate_synthetic_dataset(const SyntheticSpec& spec, std::size_t images) {
  std::vector<Scene> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < images; ++i) {
    SyntheticSpec one = spec;
    one.image_id = static_cast<ImageId>(i + 1);
    one.seed = splitmix64(spec.seed ^ splitmix64(i + 1));
    Scene scene = generate_synthetic_scene(one);
    for (auto& d : scene.detections) d.input_index += offset;
    offset += scene.detections.size();
    out.push_back(std::move(scene));
  }
  return out;
}

}  // namespace ocpose
