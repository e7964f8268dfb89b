#include "vcm/det_metrics.h"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

MatchKind ParseMatchKind(std::string_view s) {
  if (s == "box") return MatchKind::kBox;
  if (s == "mask") return MatchKind::kMask;
  throw ConfigError(fmt::format("unknown match kind '{}'", s));
}

ClassWeighting ParseClassWeighting(std::string_view s) {
  if (s == "instances") return ClassWeighting::kInstances;
  if (s == "pixels") return ClassWeighting::kPixels;
  throw ConfigError(fmt::format("unknown class weighting '{}'", s));
}

double BoxIou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

double MaskIou(const RleMask& a, const RleMask& b) {
  const RleOverlap o = MaskOverlap(a, b);
  if (o.union_area == 0) return 0.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.union_area);
}

std::vector<double> DefaultIouThresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

namespace {

std::vector<std::size_t> ScoreOrder(const DetectionSet& dets) {
  std::vector<std::size_t> order(dets.detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets.detections[a].score > dets.detections[b].score;
  });
  return order;
}

// iou[i][j]: i-th detection in score order vs reference j; -1 for class
// mismatch.
std::vector<std::vector<double>> IouMatrix(const DetectionSet& dets,
                                           const InstanceSet& refs,
                                           const std::vector<std::size_t>& order,
                                           MatchKind kind) {
  if (kind == MatchKind::kMask) {
    for (std::size_t i = 0; i < dets.detections.size(); ++i) {
      if (!dets.detections[i].mask) {
        throw InputError(fmt::format("{}: detection {} has no mask",
                                     dets.frame.Key(), i));
      }
    }
    for (std::size_t j = 0; j < refs.instances.size(); ++j) {
      if (!refs.instances[j].mask) {
        throw InputError(fmt::format("{}: reference instance {} has no mask",
                                     refs.frame.Key(), j));
      }
    }
  }
  std::vector<std::vector<double>> iou(order.size(),
                                       std::vector<double>(refs.instances.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Detection& d = dets.detections[order[i]];
    for (std::size_t j = 0; j < refs.instances.size(); ++j) {
      const Instance& r = refs.instances[j];
      if (r.class_id != d.class_id) {
        iou[i][j] = -1.0;
      } else if (kind == MatchKind::kBox) {
        iou[i][j] = BoxIou(d.bbox, r.bbox);
      } else {
        iou[i][j] = MaskIou(*d.mask, *r.mask);
      }
    }
  }
  return iou;
}

MatchResult GreedyMatch(const DetectionSet& dets, const InstanceSet& refs,
                        const std::vector<std::size_t>& order,
                        const std::vector<std::vector<double>>& iou,
                        double threshold) {
  MatchResult m;
  m.iou_threshold = threshold;
  m.ref_matched.assign(refs.instances.size(), false);
  for (const auto& r : refs.instances) ++m.ref_counts[r.class_id];
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Detection& d = dets.detections[order[i]];
    int best = -1;
    double best_iou = 0;
    for (std::size_t j = 0; j < refs.instances.size(); ++j) {
      if (m.ref_matched[j] || iou[i][j] < threshold) continue;
      if (best < 0 || iou[i][j] > best_iou) {
        best = static_cast<int>(j);
        best_iou = iou[i][j];
      }
    }
    if (best >= 0) m.ref_matched[best] = true;
    m.detections.push_back({d.class_id, d.score, best, order[i]});
  }
  return m;
}

void CheckThreshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw ConfigError(fmt::format("IoU threshold {} outside (0, 1]", t));
  }
}

}  // namespace

MatchResult MatchDetections(const DetectionSet& dets, const InstanceSet& refs,
                            double iou_threshold, MatchKind kind) {
  CheckThreshold(iou_threshold);
  const auto order = ScoreOrder(dets);
  const auto iou = IouMatrix(dets, refs, order, kind);
  return GreedyMatch(dets, refs, order, iou, iou_threshold);
}

std::vector<MatchResult> MatchAtThresholds(const DetectionSet& dets,
                                           const InstanceSet& refs,
                                           std::span<const double> thresholds,
                                           MatchKind kind) {
  for (double t : thresholds) CheckThreshold(t);
  const auto order = ScoreOrder(dets);
  const auto iou = IouMatrix(dets, refs, order, kind);
  std::vector<MatchResult> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) out.push_back(GreedyMatch(dets, refs, order, iou, t));
  return out;
}

double AveragePrecision(std::span<const MatchResult> matches, int class_id,
                        int ref_count) {
  if (ref_count < 1) {
    throw UndefinedMetricError(
        fmt::format("AP undefined for class {}: no reference instances", class_id));
  }
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> dets;
  for (const auto& m : matches) {
    for (const auto& d : m.detections) {
      if (d.class_id == class_id) dets.push_back({d.score, d.matched_ref >= 0});
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });

  const std::size_t n = dets.size();
  std::vector<double> recall(n), precision(n);
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dets[i].tp ? ++tp : ++fp;
    recall[i] = static_cast<double>(tp) / ref_count;
    precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / 101.0;
}

APResult EvaluateAp(std::span<const std::vector<MatchResult>> frames) {
  APResult out;
  if (frames.empty()) return out;
  out.iou_thresholds.reserve(frames.front().size());
  for (const auto& m : frames.front()) out.iou_thresholds.push_back(m.iou_threshold);
  const std::size_t nt = out.iou_thresholds.size();

  std::map<int, int> ref_counts;
  for (const auto& f : frames) {
    if (f.size() != nt) {
      throw InputError("frames were matched with different threshold lists");
    }
    if (nt == 0) continue;
    for (const auto& [cls, n] : f.front().ref_counts) ref_counts[cls] += n;
  }

  std::vector<MatchResult> at_threshold;
  for (const auto& [cls, n] : ref_counts) {
    if (n < 1) continue;
    auto& per = out.per_threshold[cls];
    for (std::size_t t = 0; t < nt; ++t) {
      at_threshold.clear();
      for (const auto& f : frames) at_threshold.push_back(f[t]);
      per.push_back(AveragePrecision(at_threshold, cls, n));
    }
    out.ap[cls] = std::accumulate(per.begin(), per.end(), 0.0) /
                  static_cast<double>(per.size());
  }
  return out;
}

std::map<int, double> NormalizeWeights(const std::map<int, double>& raw) {
  double total = 0;
  for (const auto& [c, v] : raw) total += v;
  if (!(total > 0)) {
    throw UndefinedMetricError("class weights undefined: reference set is empty");
  }
  std::map<int, double> w;
  for (const auto& [c, v] : raw) w[c] = v / total;
  return w;
}

std::map<int, double> ClassWeights(std::span<const InstanceSet> refs,
                                   ClassWeighting weighting) {
  std::map<int, double> raw;
  for (const auto& set : refs) {
    for (const auto& inst : set.instances) {
      if (weighting == ClassWeighting::kInstances) {
        raw[inst.class_id] += 1.0;
      } else {
        raw[inst.class_id] += inst.mask ? static_cast<double>(inst.mask->Area())
                                        : inst.bbox.Area();
      }
    }
  }
  return NormalizeWeights(raw);
}

double WeightedAp(const APResult& ap, const std::map<int, double>& weights) {
  double num = 0;
  double den = 0;
  for (const auto& [cls, value] : ap.ap) {
    const auto it = weights.find(cls);
    if (it == weights.end()) continue;
    num += it->second * value;
    den += it->second;
  }
  if (!(den > 0)) {
    throw UndefinedMetricError("wAP undefined: no weighted class has a defined AP");
  }
  return num / den;
}

double MeanAp(const APResult& ap) {
  if (ap.ap.empty()) {
    throw UndefinedMetricError("mAP undefined: no class has reference instances");
  }
  double sum = 0;
  for (const auto& [cls, v] : ap.ap) sum += v;
  return sum / static_cast<double>(ap.ap.size());
}

std::string ApTableCsv(const APResult& ap) {
  std::string out = "class_id,threshold,AP\n";
  for (const auto& [cls, per] : ap.per_threshold) {
    for (std::size_t t = 0; t < per.size(); ++t) {
      out += fmt::format("{},{:.2f},{:.4f}\n", cls, ap.iou_thresholds[t], per[t]);
    }
  }
  return out;
}

nlohmann::json ToJson(const std::vector<MatchResult>& per_threshold) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : per_threshold) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& d : m.detections) {
      dets.push_back({d.class_id, d.score, d.matched_ref, d.input_index});
    }
    nlohmann::json refs = nlohmann::json::object();
    for (const auto& [c, n] : m.ref_counts) refs[std::to_string(c)] = n;
    arr.push_back({{"threshold", m.iou_threshold},
                   {"detections", std::move(dets)},
                   {"ref_matched", m.ref_matched},
                   {"ref_counts", std::move(refs)}});
  }
  return arr;
}

std::vector<MatchResult> MatchesFromJson(const nlohmann::json& j) {
  std::vector<MatchResult> out;
  for (const auto& item : j) {
    MatchResult m;
    m.iou_threshold = item.at("threshold").get<double>();
    for (const auto& d : item.at("detections")) {
      m.detections.push_back({d.at(0).get<int>(), d.at(1).get<double>(),
                              d.at(2).get<int>(), d.at(3).get<std::size_t>()});
    }
    m.ref_matched = item.at("ref_matched").get<std::vector<bool>>();
    for (const auto& [k, v] : item.at("ref_counts").items()) {
      m.ref_counts[std::stoi(k)] = v.get<int>();
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace vcm
