#ifndef VCM_TESTS_SUPPORT_H_
#define VCM_TESTS_SUPPORT_H_

// Fixtures, random generators and independent reference implementations
// shared by the unit and acceptance tests. The oracles deliberately avoid
// the library's algorithms: they work on dense rasters and brute force.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vcm/bd_metrics.h"
#include "vcm/datamodel.h"
#include "vcm/image.h"

namespace vcm::testing {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

FrameRef MakeFrame(const std::string& sequence, int index, int width, int height);

LabelMap RandomLabelMap(std::mt19937& rng, int width, int height, int class_count,
                        double ignore_fraction, int ignore_id = kDefaultIgnoreId);

// Rectangle mask aligned with an integer box.
RleMask BoxMask(int x, int y, int w, int h, int frame_width, int frame_height);

// Random blob-ish instances with masks and boxes covering them.
DetectionSet RandomDetections(std::mt19937& rng, const FrameRef& frame, int max_count,
                              int class_count);

// References plus detections that mostly jitter them, on a 32x32 frame.
struct DetectionCase {
  DetectionSet dets;
  InstanceSet refs;
};
DetectionCase RandomDetectionCase(std::mt19937& rng, int max_dets, int max_refs,
                                  int class_count);
// True when no two same-class (detection, reference) pairs share a
// non-zero box IoU and no two detections share a score.
bool HasDistinctIous(const DetectionCase& c);

Image RandomImage(std::mt19937& rng, int width, int height, int channels);
// Smooth gradients plus mild noise; compresses like a natural image.
Image NaturalImage(int width, int height, std::uint32_t seed);

void WriteText(const std::filesystem::path& path, const std::string& text);

}  // namespace vcm::testing

namespace vcm::oracle {

struct SegScores {
  std::optional<double> miou;
  std::optional<double> oacc;
  std::optional<double> frwacc;
};

// Per-pixel brute force over all (gt, pred) pairs, integer counts until the
// final division. Prediction == ignore counts as a miss for the GT class.
SegScores BruteForceSegMetrics(const std::vector<LabelMap>& gts,
                               const std::vector<LabelMap>& preds);

double RasterBoxIou(const BBox& a, const BBox& b);
double RasterMaskIou(const RleMask& a, const RleMask& b);

// `iou[d][r]` for detections in descending score order. Tries every
// one-to-one assignment of detections to same-class references with
// IoU >= threshold and returns the one whose per-detection IoU vector (in
// score order, unmatched = -1) is lexicographically largest.
std::vector<int> ExhaustiveAssignment(const std::vector<std::vector<double>>& iou,
                                      const std::vector<int>& det_class,
                                      const std::vector<int>& ref_class, double threshold);

// 101-point interpolated AP from TP flags in rank order.
double Ap101(const std::vector<bool>& tp_in_rank_order, int positives);

// Mean over thresholds of per-class AP for one frame, using
// ExhaustiveAssignment and box IoU. Returns nullopt when the class has no
// references.
std::optional<double> ExhaustiveMeanAp(const DetectionSet& dets, const InstanceSet& refs,
                                       int class_id, const std::vector<double>& thresholds);

double LagrangeEval(const std::vector<double>& xs, const std::vector<double>& ys, double x);

// BD-rate with the log-rate interpolated by the Lagrange polynomial through
// four points and integrated by the trapezoid rule on `samples` intervals.
double TrapezoidBdRate(const std::vector<RdPoint>& anchor, const std::vector<RdPoint>& test,
                       int samples = 100000);

double Psnr(const Image& a, const Image& b);

}  // namespace vcm::oracle

#endif  // VCM_TESTS_SUPPORT_H_
