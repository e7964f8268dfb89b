#ifndef VCM_DATAMODEL_H_
#define VCM_DATAMODEL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vcm/rle.h"

namespace vcm {

inline constexpr int kDefaultSemanticClasses = 19;
inline constexpr int kDefaultInstanceClasses = 8;
inline constexpr int kDefaultIgnoreId = 255;

struct FrameRef {
  std::string dataset_id;
  std::string sequence_id;
  // Picture order count within the evaluated window.
  int frame_index = 0;
  std::filesystem::path image_path;
  int width = 0;
  int height = 0;

  // "dataset/sequence/index", unique within a plan.
  std::string Key() const;
  bool operator==(const FrameRef&) const = default;
};

// Per-pixel class IDs, row-major. Values are in [0, class_count) or equal to
// ignore_id.
class LabelMap {
 public:
  // Validates every pixel; throws InputError naming the first offender.
  LabelMap(int width, int height, int class_count, int ignore_id,
           std::vector<std::uint8_t> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int class_count() const { return class_count_; }
  int ignore_id() const { return ignore_id_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

  bool operator==(const LabelMap&) const = default;

 private:
  int width_;
  int height_;
  int class_count_;
  int ignore_id_;
  std::vector<std::uint8_t> labels_;
};

struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double Area() const { return w * h; }
  bool operator==(const BBox&) const = default;
};

// Intersects `box` with [0,width]x[0,height]. Returns true if it changed.
bool ClampToFrame(BBox& box, int width, int height);

struct Detection {
  int class_id = 0;
  double score = 0;
  BBox bbox;
  std::optional<RleMask> mask;

  bool operator==(const Detection&) const = default;
};

struct Instance {
  int class_id = 0;
  BBox bbox;
  std::optional<RleMask> mask;

  bool operator==(const Instance&) const = default;
};

struct DetectionSet {
  FrameRef frame;
  std::vector<Detection> detections;
  std::vector<std::string> warnings;
};

struct InstanceSet {
  FrameRef frame;
  std::vector<Instance> instances;
  std::vector<std::string> warnings;
};

enum class GtMode { kTrueGt, kPseudoGt };

std::string_view ToString(GtMode mode);
GtMode ParseGtMode(std::string_view s);

// One measurement cell: (codec, QP, frame, metric, GT mode[, model]).
struct EvalRecord {
  std::string codec_id;
  std::string config_id;
  int qp = 0;
  FrameRef frame;
  std::string metric_id;
  // Empty for pixel-fidelity metrics.
  std::string model_id;
  GtMode gt_mode = GtMode::kTrueGt;
  // Unset when the per-frame value is undefined or infinite.
  std::optional<double> value;
  // This frame's share of the bitstream, in bits.
  std::uint64_t rate_bits = 0;
  // Sufficient statistics for dataset-level aggregation.
  nlohmann::json payload;

  bool operator==(const EvalRecord&) const = default;
};

nlohmann::json ToJson(const FrameRef& frame);
FrameRef FrameRefFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const EvalRecord& record);
EvalRecord EvalRecordFromJson(const nlohmann::json& j);

LabelMap LoadLabelMap(const std::filesystem::path& path,
                      int class_count = kDefaultSemanticClasses,
                      int ignore_id = kDefaultIgnoreId);
void SaveLabelMap(const std::filesystem::path& path, const LabelMap& map);

// Detection JSON: array of {"class_id", "score", "bbox": [x,y,w,h],
// "mask": {"size": [h,w], "counts": string | [int...]}}.
DetectionSet ParseDetections(std::string_view json_text, const FrameRef& frame);
DetectionSet LoadDetections(const std::filesystem::path& path,
                            const FrameRef& frame);
InstanceSet ParseAnnotations(std::string_view json_text, const FrameRef& frame);
InstanceSet LoadAnnotations(const std::filesystem::path& path,
                            const FrameRef& frame);

// Canonical serialization; masks are written as COCO compressed strings.
std::string SerializeDetections(const DetectionSet& set);
std::string SerializeAnnotations(const InstanceSet& set);
void SaveDetections(const std::filesystem::path& path, const DetectionSet& set);
void SaveAnnotations(const std::filesystem::path& path, const InstanceSet& set);

}  // namespace vcm

#endif  // VCM_DATAMODEL_H_
