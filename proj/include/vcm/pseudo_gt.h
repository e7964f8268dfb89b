#ifndef VCM_PSEUDO_GT_H_
#define VCM_PSEUDO_GT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "vcm/datamodel.h"

namespace vcm {

inline constexpr double kDefaultPseudoGtScoreThreshold = 0.5;

// Predictions on the pristine frame become the reference, unchanged.
// Appends a warning when every pixel is ignore.
LabelMap SemanticPseudoGt(const LabelMap& pristine_prediction,
                          std::vector<std::string>* warnings = nullptr);

// Detections scoring >= score_threshold become score-free instances, in
// input order, masks carried through. Throws ConfigError when the threshold
// is outside [0, 1]; appends a warning when nothing survives.
InstanceSet InstancePseudoGt(const DetectionSet& pristine_prediction,
                             double score_threshold = kDefaultPseudoGtScoreThreshold,
                             std::vector<std::string>* warnings = nullptr);

// <root>/<model_id>/<sequence_id>/<frame_index><extension>
std::filesystem::path PseudoGtPath(const std::filesystem::path& root,
                                   const std::string& model_id,
                                   const FrameRef& frame,
                                   const std::string& extension);

}  // namespace vcm

#endif  // VCM_PSEUDO_GT_H_
