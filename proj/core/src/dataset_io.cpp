#include "ocpose/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ocpose/errors.hpp"

namespace ocpose {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
}

std::string annotation_label(const json& ann, std::size_t index) {
  if (ann.contains("id") && ann["id"].is_number_integer()) {
    return "annotation " + std::to_string(ann["id"].get<std::int64_t>());
  }
  return "annotation #" + std::to_string(index);
}

double number_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key) || !obj[key].is_number()) return fallback;
  return obj[key].get<double>();
}

std::optional<BinaryMask> decode_segmentation(const json& seg, MaskSize image_size,
                                              const std::string& label) {
  if (seg.is_null()) return std::nullopt;
  if (seg.is_object()) {
    if (!seg.contains("counts") || !seg.contains("size") || !seg["size"].is_array() ||
        seg["size"].size() != 2) {
      throw SchemaError(label + ": RLE segmentation needs 'counts' and 'size'");
    }
    const MaskSize size{seg["size"][0].get<std::int64_t>(), seg["size"][1].get<std::int64_t>()};
    if (size != image_size) {
      throw SchemaError(label + ": RLE size [" + std::to_string(size.height) + "," +
                        std::to_string(size.width) + "] does not match its image");
    }
    try {
      if (seg["counts"].is_string()) return decode_compressed_rle(seg["counts"].get<std::string>(), size);
      if (!seg["counts"].is_array()) throw SchemaError(label + ": RLE counts must be a list or string");
      std::vector<std::int64_t> counts;
      counts.reserve(seg["counts"].size());
      for (const auto& c : seg["counts"]) counts.push_back(c.get<std::int64_t>());
      return decode_rle(counts, size);
    } catch (const DecodeError& e) {
      throw SchemaError(label + ": " + e.what());
    }
  }
  if (seg.is_array()) {
    if (seg.empty()) return std::nullopt;
    std::vector<std::vector<Point2>> polygons;
    for (const auto& poly : seg) {
      if (!poly.is_array() || poly.size() % 2 != 0) {
        throw SchemaError(label + ": polygon must be a flat list of x,y pairs");
      }
      std::vector<Point2> pts;
      for (std::size_t i = 0; i < poly.size(); i += 2) {
        pts.push_back({poly[i].get<double>(), poly[i + 1].get<double>()});
      }
      polygons.push_back(std::move(pts));
    }
    try {
      return rasterize_polygons(polygons, image_size);
    } catch (const GeometryError& e) {
      throw SchemaError(label + ": " + e.what());
    }
  }
  throw SchemaError(label + ": unsupported segmentation encoding");
}

BBox read_bbox(const json& ann, const std::string& label) {
  if (!ann.contains("bbox")) return BBox{};
  const json& b = ann["bbox"];
  if (!b.is_array() || b.size() != 4) throw SchemaError(label + ": bbox must be [x, y, w, h]");
  return BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
}

json double_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path);
  return text;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("error writing " + path);
}

GroundTruthSet load_ground_truth(const std::string& path, std::size_t keypoint_count) {
  return parse_ground_truth(read_text_file(path), keypoint_count, path);
}

namespace {

GroundTruthSet parse_ground_truth_impl(const std::string& json_text, std::size_t keypoint_count,
                                       const std::string& source_name) {
  const json doc = parse_json(json_text, source_name);
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw SchemaError(source_name + ": ground truth needs an 'images' list");
  }

  GroundTruthSet out;
  std::map<ImageId, std::size_t> index_of;
  for (const auto& img : doc["images"]) {
    if (!img.contains("id") || !img.contains("height") || !img.contains("width")) {
      throw SchemaError(source_name + ": image entries need id, height and width");
    }
    Scene scene;
    scene.image_id = img["id"].get<ImageId>();
    scene.image_size = {img["height"].get<std::int64_t>(), img["width"].get<std::int64_t>()};
    if (img.contains("file_name") && img["file_name"].is_string()) {
      scene.file_name = img["file_name"].get<std::string>();
    }
    if (index_of.count(scene.image_id)) {
      throw SchemaError(source_name + ": duplicate image id " + std::to_string(scene.image_id));
    }
    index_of[scene.image_id] = out.scenes.size();
    out.scenes.push_back(std::move(scene));
  }

  const json empty = json::array();
  const json& anns = doc.contains("annotations") ? doc["annotations"] : empty;
  if (!anns.is_array()) throw SchemaError(source_name + ": 'annotations' must be a list");

  for (std::size_t idx = 0; idx < anns.size(); ++idx) {
    const json& ann = anns[idx];
    const std::string label = annotation_label(ann, idx);
    if (!ann.contains("image_id")) throw SchemaError(label + ": missing image_id");
    const auto image_id = ann["image_id"].get<ImageId>();
    const auto it = index_of.find(image_id);
    if (it == index_of.end()) {
      throw ReferenceError(label + ": image_id " + std::to_string(image_id) + " has no image entry");
    }
    Scene& scene = out.scenes[it->second];
    const AnnotationId id =
        ann.contains("id") && ann["id"].is_number_integer() ? ann["id"].get<AnnotationId>()
                                                             : static_cast<AnnotationId>(idx);
    const bool crowd = number_or(ann, "iscrowd", 0.0) != 0.0;
    const BBox bbox = read_bbox(ann, label);

    std::vector<GtKeypoint> keypoints;
    if (ann.contains("keypoints") && !ann["keypoints"].is_null()) {
      const json& kp = ann["keypoints"];
      if (!kp.is_array() || kp.size() != 3 * keypoint_count) {
        throw SchemaError(label + ": keypoints must have " + std::to_string(3 * keypoint_count) +
                          " values, found " + std::to_string(kp.is_array() ? kp.size() : 0));
      }
      for (std::size_t n = 0; n < keypoint_count; ++n) {
        const auto v = kp[3 * n + 2].get<int>();
        if (v < 0 || v > 2) throw SchemaError(label + ": keypoint visibility must be 0, 1 or 2");
        keypoints.push_back({kp[3 * n].get<double>(), kp[3 * n + 1].get<double>(), v});
      }
    }
    const bool labeled = std::any_of(keypoints.begin(), keypoints.end(),
                                     [](const GtKeypoint& k) { return k.labeled(); });

    const json seg = ann.contains("segmentation") ? ann["segmentation"] : json();
    // Poses never keep their mask; only decode it when it is needed.
    const bool needs_mask = crowd || !labeled || !ann.contains("area");
    std::optional<BinaryMask> mask;
    if (needs_mask) mask = decode_segmentation(seg, scene.image_size, label);

    double area = number_or(ann, "area", 0.0);
    if (!(area > 0.0)) {
      if (mask && mask->has_foreground()) {
        area = static_cast<double>(mask->foreground_count());
      } else {
        area = bbox.area();
      }
    }
    if (!(area > 0.0) || !std::isfinite(area)) {
      out.warnings.push_back(label + ": dropped, no positive area to derive a scale from");
      ++out.counts.dropped;
      continue;
    }

    if (crowd) {
      if (!mask) {
        out.warnings.push_back(label + ": dropped, crowd annotation without segmentation");
        ++out.counts.dropped;
        continue;
      }
      scene.gts.push_back(GroundTruthEntry::crowd_mask(id, std::move(*mask), bbox, area));
      ++out.counts.crowd;
    } else if (labeled) {
      scene.gts.push_back(GroundTruthEntry::pose(id, std::move(keypoints), bbox, area));
      ++out.counts.pose;
    } else if (mask) {
      scene.gts.push_back(GroundTruthEntry::instance_mask(id, std::move(*mask), bbox, area));
      ++out.counts.mask;
    } else {
      out.warnings.push_back(label + ": dropped, no labeled keypoints and no segmentation");
      ++out.counts.dropped;
    }
  }

  std::sort(out.scenes.begin(), out.scenes.end(),
            [](const Scene& a, const Scene& b) { return a.image_id < b.image_id; });
  return out;
}

}  // namespace

GroundTruthSet parse_ground_truth(const std::string& json_text, std::size_t keypoint_count,
                                  const std::string& source_name) {
  try {
    return parse_ground_truth_impl(json_text, keypoint_count, source_name);
  } catch (const json::type_error& e) {
    throw SchemaError(source_name + ": unexpected value type: " + e.what());
  } catch (const json::out_of_range& e) {
    throw SchemaError(source_name + ": " + e.what());
  }
}

std::string serialize_ground_truth(const std::vector<Scene>& scenes) {
  json images = json::array();
  json annotations = json::array();
  for (const Scene& scene : scenes) {
    json img = {{"id", scene.image_id},
                {"height", scene.image_size.height},
                {"width", scene.image_size.width}};
    if (!scene.file_name.empty()) img["file_name"] = scene.file_name;
    images.push_back(std::move(img));
    for (const GroundTruthEntry& gt : scene.gts) {
      const BBox& b = gt.bbox();
      json ann = {{"id", gt.id()},
                  {"image_id", scene.image_id},
                  {"category_id", 1},
                  {"iscrowd", gt.is_crowd() ? 1 : 0},
                  {"bbox", double_list({b.x, b.y, b.w, b.h})},
                  {"area", gt.area()}};
      if (gt.kind() == GtKind::kPose) {
        json kp = json::array();
        for (const GtKeypoint& k : gt.keypoints()) {
          kp.push_back(k.x);
          kp.push_back(k.y);
          kp.push_back(k.visibility);
        }
        ann["keypoints"] = std::move(kp);
        ann["num_keypoints"] = gt.labeled_count();
      } else {
        ann["segmentation"] = {{"counts", encode_rle(gt.mask())},
                               {"size", {gt.mask().height(), gt.mask().width()}}};
        ann["num_keypoints"] = 0;
      }
      annotations.push_back(std::move(ann));
    }
  }
  json doc = {{"images", std::move(images)},
              {"annotations", std::move(annotations)},
              {"categories", json::array({{{"id", 1}, {"name", "person"}}})}};
  return doc.dump(1);
}

std::size_t DetectionSet::kept() const {
  std::size_t n = 0;
  for (const auto& [id, dets] : by_image) n += dets.size();
  return n;
}

DetectionSet load_detections(const std::string& path, double threshold, std::size_t keypoint_count) {
  return parse_detections(read_text_file(path), threshold, keypoint_count, path);
}

namespace {

DetectionSet parse_detections_impl(const std::string& json_text, double threshold,
                                   std::size_t keypoint_count, const std::string& source_name) {
  const json doc = parse_json(json_text, source_name);
  if (!doc.is_array()) throw SchemaError(source_name + ": results file must be a JSON list");

  DetectionSet out;
  for (std::size_t idx = 0; idx < doc.size(); ++idx) {
    const json& entry = doc[idx];
    const std::string label = source_name + " entry #" + std::to_string(idx);
    ++out.read;
    if (!entry.is_object() || !entry.contains("image_id")) throw SchemaError(label + ": missing image_id");
    if (!entry.contains("keypoints") || !entry["keypoints"].is_array() ||
        entry["keypoints"].size() != 3 * keypoint_count) {
      const std::size_t found =
          entry.contains("keypoints") && entry["keypoints"].is_array() ? entry["keypoints"].size() : 0;
      throw SchemaError(label + ": keypoints must have " + std::to_string(3 * keypoint_count) +
                        " values, found " + std::to_string(found));
    }
    const json& score = entry.contains("score") ? entry["score"] : json();
    bool finite = score.is_number() && std::isfinite(score.get<double>());
    DetectionPose det;
    det.image_id = entry["image_id"].get<ImageId>();
    det.input_index = idx;
    const json& kp = entry["keypoints"];
    for (std::size_t n = 0; n < keypoint_count && finite; ++n) {
      if (!kp[3 * n].is_number() || !kp[3 * n + 1].is_number() || !kp[3 * n + 2].is_number()) {
        throw SchemaError(label + ": keypoint values must be numbers");
      }
      DetKeypoint k{kp[3 * n].get<double>(), kp[3 * n + 1].get<double>(), kp[3 * n + 2].get<double>()};
      if (!std::isfinite(k.x) || !std::isfinite(k.y) || std::isnan(k.confidence)) {
        finite = false;
        break;
      }
      k.confidence = std::clamp(k.confidence, 0.0, 1.0);
      det.keypoints.push_back(k);
    }
    if (!finite) {
      ++out.rejected_non_finite;
      continue;
    }
    det.score = score.get<double>();
    if (det.score < threshold) {
      ++out.below_threshold;
      continue;
    }
    out.by_image[det.image_id].push_back(std::move(det));
  }
  for (auto& [id, dets] : out.by_image) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const DetectionPose& a, const DetectionPose& b) { return a.score > b.score; });
  }
  return out;
}

}  // namespace

DetectionSet parse_detections(const std::string& json_text, double threshold,
                              std::size_t keypoint_count, const std::string& source_name) {
  try {
    return parse_detections_impl(json_text, threshold, keypoint_count, source_name);
  } catch (const json::type_error& e) {
    throw SchemaError(source_name + ": unexpected value type: " + e.what());
  } catch (const json::out_of_range& e) {
    throw SchemaError(source_name + ": " + e.what());
  }
}

DetectionSet filter_detections(const DetectionSet& all, double threshold) {
  DetectionSet out;
  out.read = all.read;
  out.rejected_non_finite = all.rejected_non_finite;
  out.below_threshold = all.below_threshold;
  for (const auto& [id, dets] : all.by_image) {
    std::vector<DetectionPose> kept;
    for (const auto& d : dets) {
      if (d.score < threshold) {
        ++out.below_threshold;
      } else {
        kept.push_back(d);
      }
    }
    if (!kept.empty()) out.by_image[id] = std::move(kept);
  }
  return out;
}

std::string serialize_detections(const std::vector<DetectionPose>& detections) {
  json out = json::array();
  for (const DetectionPose& d : detections) {
    json kp = json::array();
    for (const DetKeypoint& k : d.keypoints) {
      kp.push_back(k.x);
      kp.push_back(k.y);
      kp.push_back(k.confidence);
    }
    out.push_back({{"image_id", d.image_id}, {"category_id", 1}, {"keypoints", std::move(kp)}, {"score", d.score}});
  }
  return out.dump(1);
}

}  // namespace ocpose
