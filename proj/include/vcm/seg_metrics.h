#ifndef VCM_SEG_METRICS_H_
#define VCM_SEG_METRICS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/datamodel.h"

namespace vcm {

// Pixel-count accumulator for semantic segmentation. counts(g, p) is the
// number of pixels with reference class g predicted as p. Prediction pixels
// carrying the ignore ID are kept in a separate per-class "void" column that
// counts as a miss for the reference class. Reference-ignore pixels only
// increment ignored_pixels.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int class_count);

  int class_count() const { return class_count_; }
  std::uint64_t count(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * class_count_ + pred];
  }
  std::uint64_t void_count(int gt) const { return void_counts_[gt]; }
  std::uint64_t ignored_pixels() const { return ignored_; }
  // Every pixel ever accumulated, ignored ones included.
  std::uint64_t total_pixels() const;

  // Throws InputError on dimension or class-count mismatch.
  void Accumulate(const LabelMap& gt, const LabelMap& pred);
  void Add(const ConfusionMatrix& other);

  // Reference pixels of class c (row sum including the void column).
  std::uint64_t ReferenceCount(int c) const;
  std::uint64_t TruePositives(int c) const { return count(c, c); }
  std::uint64_t FalsePositives(int c) const;
  // Includes void predictions.
  std::uint64_t FalseNegatives(int c) const;

  // "C rows x C columns" of integer counts.
  std::string ToCsv() const;
  nlohmann::json ToJson() const;
  static ConfusionMatrix FromJson(const nlohmann::json& j);

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int class_count_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> void_counts_;
  std::uint64_t ignored_ = 0;
};

ConfusionMatrix Accumulate(ConfusionMatrix cm, const LabelMap& gt,
                           const LabelMap& pred);
// Throws InputError if class counts differ.
ConfusionMatrix Merge(const ConfusionMatrix& a, const ConfusionMatrix& b);

// Per-class IoU; nullopt where TP+FP+FN = 0.
std::vector<std::optional<double>> ClassIoU(const ConfusionMatrix& cm);

// Mean of the defined per-class IoUs. Throws UndefinedMetricError when no
// class has a non-zero denominator.
double MeanIoU(const ConfusionMatrix& cm);
// trace / (all non-ignored pixels). Throws UndefinedMetricError when empty.
double OverallAccuracy(const ConfusionMatrix& cm);
// Sum over classes of (reference share) * IoU.
double FrequencyWeightedAccuracy(const ConfusionMatrix& cm);

}  // namespace vcm

#endif  // VCM_SEG_METRICS_H_
