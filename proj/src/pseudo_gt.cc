#include "vcm/pseudo_gt.h"

#include <algorithm>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

LabelMap SemanticPseudoGt(const LabelMap& pristine_prediction,
                          std::vector<std::string>* warnings) {
  const auto& labels = pristine_prediction.labels();
  const int ignore = pristine_prediction.ignore_id();
  const bool all_ignore = std::all_of(labels.begin(), labels.end(),
                                      [ignore](std::uint8_t v) { return v == ignore; });
  if (all_ignore && warnings) {
    warnings->push_back("pseudo-GT label map is entirely ignore pixels");
  }
  return pristine_prediction;
}

InstanceSet InstancePseudoGt(const DetectionSet& pristine_prediction,
                             double score_threshold,
                             std::vector<std::string>* warnings) {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw ConfigError(
        fmt::format("pseudo-GT score threshold {} outside [0, 1]", score_threshold));
  }
  InstanceSet out;
  out.frame = pristine_prediction.frame;
  for (const auto& d : pristine_prediction.detections) {
    if (d.score >= score_threshold) out.instances.push_back({d.class_id, d.bbox, d.mask});
  }
  if (out.instances.empty() && warnings) {
    warnings->push_back(fmt::format(
        "{}: no detection reaches score {}; pseudo-GT frame is empty",
        out.frame.Key(), score_threshold));
  }
  return out;
}

std::filesystem::path PseudoGtPath(const std::filesystem::path& root,
                                   const std::string& model_id,
                                   const FrameRef& frame,
                                   const std::string& extension) {
  return root / model_id / frame.sequence_id /
         (std::to_string(frame.frame_index) + extension);
}

}  // namespace vcm
