#pragma once

#include <cstdint>
#include <vector>

#include "ocpose/types.hpp"

namespace ocpose {

// Generation recipe for one image. Every person is a box of height h and
// width h/2; its annotated area is the box area.
struct SyntheticSpec {
  ImageId image_id = 1;
  MaskSize image_size{480, 640};
  std::size_t keypoints = 17;

  std::size_t gt_poses = 3;
  std::size_t mask_only_people = 0;  // annotated by mask only, no keypoints
  std::size_t crowds = 0;            // rectangular crowd regions
  double person_height_min = 24.0;
  double person_height_max = 40.0;

  // Detections. Each GT pose gets one detection; the first `jittered` of
  // them are perturbed with Gaussian noise instead of copied exactly.
  double perfect_score = 0.9;
  std::size_t jittered = 0;
  double jitter_sigma = 2.0;
  double jitter_score = 0.8;
  std::size_t duplicates = 0;  // extra jittered copies of GT poses
  double duplicate_score = 0.4;
  std::size_t detections_per_crowd = 0;  // placed fully inside each crowd
  double crowd_detection_score = 0.6;
  std::size_t far_false_positives = 0;
  double far_fp_score = 0.05;
  // Far false positives keep every keypoint at least this many object
  // scales away from every GT.
  double far_distance_factor = 10.0;

  std::uint64_t seed = 0;
  std::size_t max_attempts = 2000;  // per placed object
};

// Deterministic: equal SyntheticSpec values give identical scenes.
// Throws GenerationError when objects cannot be placed.
Scene generate_synthetic_scene(const SyntheticSpec& spec);

// `images` scenes with ids 1..images, each seeded from (spec.seed, index).
std::vector<Scene> generate_synthetic_dataset(const SyntheticSpec& spec, std::size_t images);

// Canonical standing pose inside the unit box, one point per keypoint.
std::vector<Point2> pose_template(std::size_t keypoints);

// Template scaled into the box [x, x + h/2] x [y, y + h].
std::vector<DetKeypoint> place_pose(std::size_t keypoints, double x, double y, double height,
                                    double confidence);

}  // namespace ocpose
