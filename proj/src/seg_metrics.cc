#include "vcm/seg_metrics.h"

#include <numeric>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

ConfusionMatrix::ConfusionMatrix(int class_count)
    : class_count_(class_count),
      counts_(static_cast<std::size_t>(class_count) * class_count, 0),
      void_counts_(class_count, 0) {
  if (class_count <= 0) {
    throw InputError(fmt::format("class count must be positive, got {}",
                                 class_count));
  }
}

std::uint64_t ConfusionMatrix::total_pixels() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}) +
         std::accumulate(void_counts_.begin(), void_counts_.end(),
                         std::uint64_t{0}) +
         ignored_;
}

void ConfusionMatrix::Accumulate(const LabelMap& gt, const LabelMap& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw InputError(fmt::format("label map size mismatch: {}x{} vs {}x{}",
                                 gt.width(), gt.height(), pred.width(),
                                 pred.height()));
  }
  if (gt.class_count() != class_count_ || pred.class_count() != class_count_) {
    throw InputError(fmt::format(
        "class count mismatch: matrix {}, reference {}, prediction {}",
        class_count_, gt.class_count(), pred.class_count()));
  }
  const auto& g = gt.labels();
  const auto& p = pred.labels();
  const int gt_ignore = gt.ignore_id();
  const int pred_ignore = pred.ignore_id();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int gc = g[i];
    if (gc == gt_ignore) {
      ++ignored_;
      continue;
    }
    const int pc = p[i];
    if (pc == pred_ignore) {
      ++void_counts_[gc];
    } else {
      ++counts_[static_cast<std::size_t>(gc) * class_count_ + pc];
    }
  }
}

void ConfusionMatrix::Add(const ConfusionMatrix& other) {
  if (other.class_count_ != class_count_) {
    throw InputError(fmt::format("cannot merge confusion matrices with {} and {} classes",
                                 class_count_, other.class_count_));
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < void_counts_.size(); ++i) {
    void_counts_[i] += other.void_counts_[i];
  }
  ignored_ += other.ignored_;
}

std::uint64_t ConfusionMatrix::ReferenceCount(int c) const {
  std::uint64_t n = void_counts_[c];
  for (int p = 0; p < class_count_; ++p) n += count(c, p);
  return n;
}

std::uint64_t ConfusionMatrix::FalsePositives(int c) const {
  std::uint64_t n = 0;
  for (int g = 0; g < class_count_; ++g) {
    if (g != c) n += count(g, c);
  }
  return n;
}

std::uint64_t ConfusionMatrix::FalseNegatives(int c) const {
  return ReferenceCount(c) - count(c, c);
}

std::string ConfusionMatrix::ToCsv() const {
  std::string out;
  for (int g = 0; g < class_count_; ++g) {
    for (int p = 0; p < class_count_; ++p) {
      if (p) out += ',';
      out += std::to_string(count(g, p));
    }
    out += '\n';
  }
  return out;
}

nlohmann::json ConfusionMatrix::ToJson() const {
  return {{"class_count", class_count_},
          {"counts", counts_},
          {"void", void_counts_},
          {"ignored", ignored_}};
}

ConfusionMatrix ConfusionMatrix::FromJson(const nlohmann::json& j) {
  ConfusionMatrix cm(j.at("class_count").get<int>());
  auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
  auto voids = j.at("void").get<std::vector<std::uint64_t>>();
  if (counts.size() != cm.counts_.size() || voids.size() != cm.void_counts_.size()) {
    throw InputError("confusion matrix payload has wrong shape");
  }
  cm.counts_ = std::move(counts);
  cm.void_counts_ = std::move(voids);
  cm.ignored_ = j.at("ignored").get<std::uint64_t>();
  return cm;
}

ConfusionMatrix Accumulate(ConfusionMatrix cm, const LabelMap& gt,
                           const LabelMap& pred) {
  cm.Accumulate(gt, pred);
  return cm;
}

ConfusionMatrix Merge(const ConfusionMatrix& a, const ConfusionMatrix& b) {
  ConfusionMatrix out = a;
  out.Add(b);
  return out;
}

std::vector<std::optional<double>> ClassIoU(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> iou(cm.class_count());
  for (int c = 0; c < cm.class_count(); ++c) {
    const std::uint64_t tp = cm.TruePositives(c);
    const std::uint64_t denom = tp + cm.FalsePositives(c) + cm.FalseNegatives(c);
    if (denom > 0) {
      iou[c] = static_cast<double>(tp) / static_cast<double>(denom);
    }
  }
  return iou;
}

double MeanIoU(const ConfusionMatrix& cm) {
  double sum = 0;
  int defined = 0;
  for (const auto& v : ClassIoU(cm)) {
    if (v) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) {
    throw UndefinedMetricError("mIoU undefined: no class has reference or predicted pixels");
  }
  return sum / defined;
}

double OverallAccuracy(const ConfusionMatrix& cm) {
  std::uint64_t trace = 0;
  std::uint64_t total = 0;
  for (int c = 0; c < cm.class_count(); ++c) {
    trace += cm.TruePositives(c);
    total += cm.ReferenceCount(c);
  }
  if (total == 0) {
    throw UndefinedMetricError("oAcc undefined: no non-ignored pixels");
  }
  return static_cast<double>(trace) / static_cast<double>(total);
}

double FrequencyWeightedAccuracy(const ConfusionMatrix& cm) {
  std::uint64_t total = 0;
  for (int c = 0; c < cm.class_count(); ++c) total += cm.ReferenceCount(c);
  if (total == 0) {
    throw UndefinedMetricError("frwAcc undefined: no non-ignored pixels");
  }
  const auto iou = ClassIoU(cm);
  double sum = 0;
  for (int c = 0; c < cm.class_count(); ++c) {
    const std::uint64_t freq = cm.ReferenceCount(c);
    if (freq == 0 || !iou[c]) continue;
    sum += static_cast<double>(freq) * *iou[c];
  }
  return sum / static_cast<double>(total);
}

}  // namespace vcm
