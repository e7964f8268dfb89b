#include "vcm/datamodel.h"

#include <algorithm>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/image.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FrameRef::Key() const {
  return fmt::format("{}/{}/{}", dataset_id, sequence_id, frame_index);
}

LabelMap::LabelMap(int width, int height, int class_count, int ignore_id,
                   std::vector<std::uint8_t> labels)
    : width_(width),
      height_(height),
      class_count_(class_count),
      ignore_id_(ignore_id),
      labels_(std::move(labels)) {
  if (width <= 0 || height <= 0) {
    throw InputError(fmt::format("label map has zero dimension ({}x{})", width,
                                 height));
  }
  if (class_count <= 0 || class_count > 255) {
    throw InputError(fmt::format("class count {} outside [1, 255]", class_count));
  }
  if (ignore_id >= 0 && ignore_id < class_count) {
    throw InputError(fmt::format("ignore ID {} collides with class range [0, {})",
                                 ignore_id, class_count));
  }
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    throw InputError(fmt::format("label map has {} pixels, expected {}x{}",
                                 labels_.size(), width, height));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int v = labels_[i];
    if (v != ignore_id && v >= class_count) {
      throw InputError(fmt::format("class ID {} ≥ {} at pixel index {}", v,
                                   class_count, i));
    }
  }
}

bool ClampToFrame(BBox& box, int width, int height) {
  const double x0 = std::clamp(box.x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(box.y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(box.x + box.w, 0.0, static_cast<double>(width));
  const double y1 = std::clamp(box.y + box.h, 0.0, static_cast<double>(height));
  const BBox clamped{x0, y0, x1 - x0, y1 - y0};
  const bool changed = !(clamped == box);
  box = clamped;
  return changed;
}

std::string_view ToString(GtMode mode) {
  return mode == GtMode::kTrueGt ? "true_gt" : "pseudo_gt";
}

GtMode ParseGtMode(std::string_view s) {
  if (s == "true_gt" || s == "true") return GtMode::kTrueGt;
  if (s == "pseudo_gt" || s == "pseudo") return GtMode::kPseudoGt;
  throw ConfigError(fmt::format("unknown GT mode '{}'", s));
}

json ToJson(const FrameRef& frame) {
  return json{{"dataset_id", frame.dataset_id},
              {"sequence_id", frame.sequence_id},
              {"frame_index", frame.frame_index},
              {"image_path", frame.image_path.generic_string()},
              {"width", frame.width},
              {"height", frame.height}};
}

FrameRef FrameRefFromJson(const json& j) {
  FrameRef f;
  f.dataset_id = j.at("dataset_id").get<std::string>();
  f.sequence_id = j.at("sequence_id").get<std::string>();
  f.frame_index = j.at("frame_index").get<int>();
  f.image_path = j.at("image_path").get<std::string>();
  f.width = j.at("width").get<int>();
  f.height = j.at("height").get<int>();
  return f;
}

json ToJson(const EvalRecord& r) {
  json j{{"codec_id", r.codec_id},       {"config_id", r.config_id},
         {"qp", r.qp},                   {"frame", ToJson(r.frame)},
         {"metric_id", r.metric_id},     {"model_id", r.model_id},
         {"gt_mode", ToString(r.gt_mode)}, {"rate_bits", r.rate_bits},
         {"payload", r.payload}};
  j["value"] = r.value ? json(*r.value) : json(nullptr);
  return j;
}

EvalRecord EvalRecordFromJson(const json& j) {
  EvalRecord r;
  r.codec_id = j.at("codec_id").get<std::string>();
  r.config_id = j.at("config_id").get<std::string>();
  r.qp = j.at("qp").get<int>();
  r.frame = FrameRefFromJson(j.at("frame"));
  r.metric_id = j.at("metric_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.gt_mode = ParseGtMode(j.at("gt_mode").get<std::string>());
  r.rate_bits = j.at("rate_bits").get<std::uint64_t>();
  r.payload = j.value("payload", json(nullptr));
  if (!j.at("value").is_null()) r.value = j.at("value").get<double>();
  return r;
}

LabelMap LoadLabelMap(const fs::path& path, int class_count, int ignore_id) {
  const Image img = ReadPng(path);
  if (img.channels != 1) {
    throw InputError(
        fmt::format("{}: label map must be a single-channel raster", path.string()));
  }
  try {
    return LabelMap(img.width, img.height, class_count, ignore_id, img.pixels);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void SaveLabelMap(const fs::path& path, const LabelMap& map) {
  Image img(map.width(), map.height(), 1);
  img.pixels = map.labels();
  WritePng(path, img);
}

namespace {

json ParseArray(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_array()) throw InputError("malformed JSON: expected an array");
  return j;
}

struct Geometry {
  int class_id;
  BBox bbox;
  std::optional<RleMask> mask;
};

Geometry ParseGeometry(const json& item, const FrameRef& frame, std::size_t index,
                       std::vector<std::string>& warnings) {
  try {
    Geometry g;
    g.class_id = item.at("class_id").get<int>();
    if (g.class_id < 0) {
      throw InputError(fmt::format("negative class_id {}", g.class_id));
    }
    const auto& b = item.at("bbox");
    if (!b.is_array() || b.size() != 4) {
      throw InputError("bbox must be [x, y, w, h]");
    }
    g.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
              b[3].get<double>()};
    if (g.bbox.w < 0 || g.bbox.h < 0) {
      throw InputError("bbox with negative extent");
    }
    if (frame.width > 0 && frame.height > 0) {
      const BBox before = g.bbox;
      if (ClampToFrame(g.bbox, frame.width, frame.height)) {
        warnings.push_back(fmt::format(
            "{}: record {} bbox [{}, {}, {}, {}] clamped to frame", frame.Key(),
            index, before.x, before.y, before.w, before.h));
      }
    }
    if (auto it = item.find("mask"); it != item.end() && !it->is_null()) {
      const auto& size = it->at("size");
      const int h = size.at(0).get<int>();
      const int w = size.at(1).get<int>();
      const auto& counts = it->at("counts");
      if (counts.is_string()) {
        g.mask = RleMask::FromCocoString(h, w, counts.get<std::string>());
      } else {
        g.mask = RleMask(h, w, counts.get<std::vector<std::uint32_t>>());
      }
      if (frame.width > 0 && frame.height > 0 &&
          (h != frame.height || w != frame.width)) {
        throw InputError(fmt::format("mask size {}x{} does not match frame {}x{}",
                                     h, w, frame.height, frame.width));
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("record {}: {}", index, e.what()));
  } catch (const InputError& e) {
    throw InputError(fmt::format("record {}: {}", index, e.what()));
  }
}

json GeometryJson(int class_id, const BBox& b, const std::optional<RleMask>& mask) {
  json j{{"class_id", class_id}, {"bbox", {b.x, b.y, b.w, b.h}}};
  if (mask) {
    j["mask"] = {{"size", {mask->height(), mask->width()}},
                 {"counts", mask->ToCocoString()}};
  }
  return j;
}

}  // namespace

DetectionSet ParseDetections(std::string_view json_text, const FrameRef& frame) {
  const json arr = ParseArray(json_text);
  DetectionSet set;
  set.frame = frame;
  set.detections.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Geometry g = ParseGeometry(arr[i], frame, i, set.warnings);
    double score = 0;
    try {
      score = arr[i].at("score").get<double>();
    } catch (const json::exception& e) {
      throw InputError(fmt::format("record {}: {}", i, e.what()));
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw InputError(fmt::format("record {}: score out of range ({})", i, score));
    }
    set.detections.push_back({g.class_id, score, g.bbox, std::move(g.mask)});
  }
  return set;
}

DetectionSet LoadDetections(const fs::path& path, const FrameRef& frame) {
  try {
    return ParseDetections(ReadTextFile(path), frame);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

InstanceSet ParseAnnotations(std::string_view json_text, const FrameRef& frame) {
  const json arr = ParseArray(json_text);
  InstanceSet set;
  set.frame = frame;
  set.instances.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Geometry g = ParseGeometry(arr[i], frame, i, set.warnings);
    set.instances.push_back({g.class_id, g.bbox, std::move(g.mask)});
  }
  return set;
}

InstanceSet LoadAnnotations(const fs::path& path, const FrameRef& frame) {
  try {
    return ParseAnnotations(ReadTextFile(path), frame);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string SerializeDetections(const DetectionSet& set) {
  json arr = json::array();
  for (const auto& d : set.detections) {
    json j = GeometryJson(d.class_id, d.bbox, d.mask);
    j["score"] = d.score;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::string SerializeAnnotations(const InstanceSet& set) {
  json arr = json::array();
  for (const auto& inst : set.instances) {
    arr.push_back(GeometryJson(inst.class_id, inst.bbox, inst.mask));
  }
  return arr.dump(1) + "\n";
}

void SaveDetections(const fs::path& path, const DetectionSet& set) {
  WriteFileAtomic(path, SerializeDetections(set));
}

void SaveAnnotations(const fs::path& path, const InstanceSet& set) {
  WriteFileAtomic(path, SerializeAnnotations(set));
}

}  // namespace vcm
