#ifndef VCM_PLAN_H_
#define VCM_PLAN_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vcm/bd_metrics.h"
#include "vcm/codec_adapter.h"
#include "vcm/datamodel.h"
#include "vcm/det_metrics.h"
#include "vcm/quality_metrics.h"

namespace vcm {

inline constexpr int kPlanSchemaVersion = 1;

enum class Task { kSemantic, kInstance, kDetection };

std::string_view ToString(Task task);
Task ParseTask(std::string_view s);

// Metric IDs a task can produce.
const std::vector<std::string>& TaskMetrics(Task task);
// "psnr", "vmaf".
bool IsQualityMetric(std::string_view metric_id);
bool IsSegmentationMetric(std::string_view metric_id);
bool IsDetectionMetric(std::string_view metric_id);

struct ModelSpec {
  std::string model_id;
  // Row label in reports; defaults to model_id.
  std::string label;
  Task task = Task::kSemantic;
  int class_count = kDefaultSemanticClasses;
  int ignore_id = kDefaultIgnoreId;
  std::vector<std::string> metrics;
  // Root of <variant>/<sequence>/<index>.<ext> prediction files.
  std::filesystem::path predictions;
  std::optional<std::filesystem::path> true_gt;
  // Optional per-cell inference hook; placeholders {input_dir} {output_dir}
  // {model_id} {variant}.
  std::string infer_command;
  std::vector<std::string> env_passthrough;

  MatchKind match_kind() const {
    return task == Task::kInstance ? MatchKind::kMask : MatchKind::kBox;
  }
  // ".png" for label maps, ".json" for instance files.
  std::string extension() const { return task == Task::kSemantic ? ".png" : ".json"; }
};

// Frames [start, start + count) of every sequence; labeled_index marks the
// annotated frame inside the window.
struct FrameWindow {
  int start = 0;
  int count = 0;
  std::optional<int> labeled_index;
};

struct PlanOptions {
  double score_threshold = 0.5;
  std::vector<double> iou_thresholds = DefaultIouThresholds();
  PsnrColor psnr_color = PsnrColor::kRaster;
  std::optional<double> fps;
  ClassWeighting class_weighting = ClassWeighting::kInstances;
  std::optional<FitKind> fit;
  MonotonicityPolicy monotonicity = MonotonicityPolicy::kStrict;
};

struct ExperimentPlan {
  std::string name;
  std::string dataset_id;
  std::vector<FrameRef> frames;
  std::optional<FrameWindow> window;
  std::vector<CodecSpec> codecs;
  std::vector<int> qp_ladder;
  std::vector<std::string> quality_metrics;
  // codec_id -> qp -> sequence_id -> VMAF log path.
  std::map<std::string, std::map<int, std::map<std::string, std::filesystem::path>>> vmaf;
  std::vector<ModelSpec> models;
  std::vector<GtMode> gt_modes;
  PlanOptions options;
  // PlanHash of the plan with overrides applied; names the results directory.
  std::string hash;
  nlohmann::json canonical;

  const CodecSpec& codec(const std::string& codec_id) const;
  const ModelSpec& model(const std::string& model_id) const;
  bool HasMode(GtMode mode) const;
  // Frames grouped by sequence, each in frame_index order.
  std::map<std::string, std::vector<FrameRef>> Sequences() const;
};

// Preset QP ladders.
inline const std::vector<int> kCtcQpLadder = {22, 27, 32, 37};
inline const std::vector<int> kHighRateQpLadder = {12, 17, 22, 27};

// SHA-256 over the key-sorted plan, ignoring name, gt_modes and the
// BD-rate/report-only options (fit, monotonicity, fps).
std::string PlanHash(const nlohmann::json& plan);

// Relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentPlan ParsePlan(const nlohmann::json& j, const std::filesystem::path& base_dir);
// Missing file -> ConfigError naming the path.
ExperimentPlan LoadPlan(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides = {});

// Applies "key=value". Known keys: score_threshold, fit, monotonicity,
// psnr_color, fps, class_weighting, gt_modes, qp_ladder, iou_thresholds.
// Throws ConfigError for anything else.
void ApplyOverride(nlohmann::json& plan, std::string_view key_value);
const std::vector<std::string>& OverrideKeys();

}  // namespace vcm

#endif  // VCM_PLAN_H_
