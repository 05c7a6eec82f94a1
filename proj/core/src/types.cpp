#include "ocpose/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "ocpose/errors.hpp"

namespace ocpose {

const char* to_string(GtKind kind) {
  switch (kind) {
    case GtKind::kPose:
      return "pose";
    case GtKind::kMask:
      return "mask";
    case GtKind::kCrowdMask:
      return "crowd";
  }
  return "unknown";
}

GroundTruthEntry GroundTruthEntry::pose(AnnotationId id, std::vector<GtKeypoint> keypoints,
                                        BBox bbox, double area) {
  GroundTruthEntry e(GtKind::kPose, id, bbox, area);
  e.keypoints_ = std::move(keypoints);
  if (e.labeled_count() == 0) {
    throw SchemaError("annotation " + std::to_string(id) + ": pose has no labeled keypoints");
  }
  if (!(e.scale() > 0.0)) {
    throw SchemaError("annotation " + std::to_string(id) + ": scale must be positive");
  }
  return e;
}

GroundTruthEntry GroundTruthEntry::instance_mask(AnnotationId id, BinaryMask mask, BBox bbox,
                                                 double area) {
  GroundTruthEntry e(GtKind::kMask, id, bbox, area);
  e.mask_ = std::move(mask);
  if (!(e.scale() > 0.0)) {
    throw SchemaError("annotation " + std::to_string(id) + ": scale must be positive");
  }
  return e;
}

GroundTruthEntry GroundTruthEntry::crowd_mask(AnnotationId id, BinaryMask mask, BBox bbox,
                                              double area) {
  GroundTruthEntry e(GtKind::kCrowdMask, id, bbox, area);
  e.mask_ = std::move(mask);
  if (!(e.scale() > 0.0)) {
    throw SchemaError("annotation " + std::to_string(id) + ": scale must be positive");
  }
  return e;
}

double GroundTruthEntry::scale() const { return std::sqrt(area_); }

std::size_t GroundTruthEntry::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(keypoints_.begin(), keypoints_.end(), [](const GtKeypoint& k) { return k.labeled(); }));
}

std::size_t Scene::count(GtKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(gts.begin(), gts.end(), [kind](const GroundTruthEntry& g) { return g.kind() == kind; }));
}

SigmaTable::SigmaTable(std::vector<double> k) : k_(std::move(k)) {
  if (k_.empty()) throw ConfigError("sigma table is empty");
  for (std::size_t i = 0; i < k_.size(); ++i) {
    if (!(k_[i] > 0.0) || !std::isfinite(k_[i])) {
      throw ConfigError("sigma table entry " + std::to_string(i) + " must be positive and finite");
    }
  }
}

SigmaTable SigmaTable::coco() {
  // 2 * {.26 .25 .25 .35 .35 .79 .79 .72 .72 .62 .62 1.07 1.07 .87 .87 .89 .89} / 10
  return SigmaTable({0.052, 0.050, 0.050, 0.070, 0.070, 0.158, 0.158, 0.144, 0.144, 0.124, 0.124,
                     0.214, 0.214, 0.174, 0.174, 0.178, 0.178});
}

SigmaTable SigmaTable::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sigma file: " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
  if (!doc.is_array()) throw ConfigError(path + ": sigma file must be a JSON list of numbers");
  std::vector<double> k;
  for (const auto& v : doc) {
    if (!v.is_number()) throw ConfigError(path + ": sigma file must be a JSON list of numbers");
    k.push_back(v.get<double>());
  }
  return SigmaTable(std::move(k));
}

std::string SigmaTable::digest() const {
  // FNV-1a over the IEEE bit patterns.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : k_) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ocpose
