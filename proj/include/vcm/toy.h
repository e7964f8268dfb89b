#ifndef VCM_TOY_H_
#define VCM_TOY_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vcm/datamodel.h"
#include "vcm/image.h"
#include "vcm/orchestrator.h"

namespace vcm {

// Synthetic street-like scenes: a textured background (class 0) with shaded
// objects of three classes. Semantic labels use classes 0..3, instance
// labels 0..2 (semantic class - 1). The bottom rows are labeled ignore.
inline constexpr int kToySemanticClasses = 4;
inline constexpr int kToyInstanceClasses = 3;
inline constexpr int kToyIgnoreRows = 3;

struct ToyScene {
  Image image;
  LabelMap semantic;
  InstanceSet instances;
};

// Objects keep their identity across frame indices of one sequence and
// drift by about a pixel per frame.
ToyScene RenderToyScene(std::uint32_t sequence_seed, const FrameRef& frame);

// Nearest color prototype after a 3x3 box blur.
LabelMap ToySegment(const Image& image);
// Connected components of ToySegment output; scores come from the color
// margin between the best and second-best prototype.
DetectionSet ToyDetect(const Image& image, const FrameRef& frame);

// Deterministic image-processing stand-in for a trained network.
class ToyPredictor : public Predictor {
 public:
  void Predict(const ModelSpec& model, const Image& image, const FrameRef& frame,
               const std::filesystem::path& output) const override;
};

// Writes images/<seq>/<idx>.png, gt/semantic/<seq>/<idx>.png and
// gt/instances/<seq>/<idx>.json under `root`.
std::vector<FrameRef> WriteToyDataset(const std::filesystem::path& root, int sequences,
                                      int frames_per_sequence, int width, int height);

}  // namespace vcm

#endif  // VCM_TOY_H_
