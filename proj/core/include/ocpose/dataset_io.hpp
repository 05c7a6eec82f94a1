#pragma once

#include <map>
#include <string>
#include <vector>

#include "ocpose/types.hpp"

namespace ocpose {

// How each annotation was classified. Every annotation lands in exactly
// one bucket, so the four counts sum to the number of annotations read.
struct KindCounts {
  std::size_t pose = 0;
  std::size_t mask = 0;
  std::size_t crowd = 0;
  std::size_t dropped = 0;

  std::size_t total() const { return pose + mask + crowd + dropped; }
};

struct GroundTruthSet {
  std::vector<Scene> scenes;  // sorted by image_id, detections empty
  KindCounts counts;
  std::vector<std::string> warnings;
};

// Ground truth in COCO keypoint-annotation format. `keypoint_count` is the
// skeleton size every pose must have (17 for COCO).
GroundTruthSet load_ground_truth(const std::string& path, std::size_t keypoint_count);
GroundTruthSet parse_ground_truth(const std::string& json_text, std::size_t keypoint_count,
                                  const std::string& source_name = "<memory>");

// Writes COCO annotation JSON. Masks are written as uncompressed RLE, so
// reloading the output reproduces the scenes exactly.
std::string serialize_ground_truth(const std::vector<Scene>& scenes);

struct DetectionSet {
  // Kept detections per image in (descending score, input index) order.
  std::map<ImageId, std::vector<DetectionPose>> by_image;
  std::size_t read = 0;
  std::size_t below_threshold = 0;
  std::size_t rejected_non_finite = 0;

  std::size_t kept() const;
};

// COCO results JSON: an array of {image_id, category_id, keypoints, score}.
DetectionSet load_detections(const std::string& path, double threshold, std::size_t keypoint_count);
DetectionSet parse_detections(const std::string& json_text, double threshold,
                              std::size_t keypoint_count,
                              const std::string& source_name = "<memory>");

// Re-applies a (higher) confidence threshold to an already parsed set.
DetectionSet filter_detections(const DetectionSet& all, double threshold);

std::string serialize_detections(const std::vector<DetectionPose>& detections);

// Reads a whole file, mapping failures to IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ocpose
