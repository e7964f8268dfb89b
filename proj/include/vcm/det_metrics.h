#ifndef VCM_DET_METRICS_H_
#define VCM_DET_METRICS_H_

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vcm/datamodel.h"

namespace vcm {

enum class MatchKind { kBox, kMask };

// How class frequency is measured for wAP weights.
enum class ClassWeighting { kInstances, kPixels };

MatchKind ParseMatchKind(std::string_view s);
ClassWeighting ParseClassWeighting(std::string_view s);

// Continuous-coordinate box IoU; 0 when the union is empty.
double BoxIou(const BBox& a, const BBox& b);
// Throws InputError on size mismatch.
double MaskIou(const RleMask& a, const RleMask& b);

// {0.50, 0.55, ..., 0.95}, each computed as k/100 so that e.g. 0.6 is the
// same double as the literal.
std::vector<double> DefaultIouThresholds();

struct MatchedDetection {
  int class_id = 0;
  double score = 0;
  // Index into the reference list, or -1 for a false positive.
  int matched_ref = -1;
  std::size_t input_index = 0;

  bool operator==(const MatchedDetection&) const = default;
};

struct MatchResult {
  double iou_threshold = 0.5;
  // Descending score; ties keep input order.
  std::vector<MatchedDetection> detections;
  std::vector<bool> ref_matched;
  // Reference instances per class in this frame.
  std::map<int, int> ref_counts;

  bool operator==(const MatchResult&) const = default;
};

// Greedy matching: in score order, each detection takes the unmatched
// same-class reference with the highest IoU >= threshold (first index wins
// ties). Throws InputError for kMask when a mask is missing.
MatchResult MatchDetections(const DetectionSet& dets, const InstanceSet& refs,
                            double iou_threshold, MatchKind kind);

// One MatchResult per threshold, sharing a single IoU computation.
std::vector<MatchResult> MatchAtThresholds(const DetectionSet& dets,
                                           const InstanceSet& refs,
                                           std::span<const double> thresholds,
                                           MatchKind kind);

// 101-point interpolated AP for one class at the threshold the matches were
// made with. Detections from all frames are sorted together by descending
// score; ties keep the order of `matches` then in-frame order.
// Throws UndefinedMetricError when ref_count < 1.
double AveragePrecision(std::span<const MatchResult> matches, int class_id,
                        int ref_count);

struct APResult {
  std::vector<double> iou_thresholds;
  // Only classes with at least one reference instance appear.
  std::map<int, std::vector<double>> per_threshold;
  // Mean over thresholds.
  std::map<int, double> ap;
};

// `frames[i]` holds MatchAtThresholds output for frame i; all frames must
// use the same threshold list.
APResult EvaluateAp(std::span<const std::vector<MatchResult>> frames);

// weight_c = N_c / sum_k N_k. Throws UndefinedMetricError if nothing is
// counted.
std::map<int, double> ClassWeights(std::span<const InstanceSet> refs,
                                   ClassWeighting weighting = ClassWeighting::kInstances);
std::map<int, double> NormalizeWeights(const std::map<int, double>& raw);

// Sum of weight_c * AP_c over classes with defined AP, with the weights
// renormalized over that subset.
double WeightedAp(const APResult& ap, const std::map<int, double>& weights);
// Unweighted mean over defined classes.
double MeanAp(const APResult& ap);

// Per-class AP table, rows "class_id,threshold,AP".
std::string ApTableCsv(const APResult& ap);

nlohmann::json ToJson(const std::vector<MatchResult>& per_threshold);
std::vector<MatchResult> MatchesFromJson(const nlohmann::json& j);

}  // namespace vcm

#endif  // VCM_DET_METRICS_H_
