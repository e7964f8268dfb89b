#include "support.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace vcm::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "vcm-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

FrameRef MakeFrame(const std::string& sequence, int index, int width, int height) {
  FrameRef f;
  f.dataset_id = "test";
  f.sequence_id = sequence;
  f.frame_index = index;
  f.width = width;
  f.height = height;
  return f;
}

LabelMap RandomLabelMap(std::mt19937& rng, int width, int height, int class_count,
                        double ignore_fraction, int ignore_id) {
  std::uniform_int_distribution<int> cls(0, class_count - 1);
  std::bernoulli_distribution ignore(ignore_fraction);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
  for (auto& l : labels) {
    l = static_cast<std::uint8_t>(ignore(rng) ? ignore_id : cls(rng));
  }
  return LabelMap(width, height, class_count, ignore_id, std::move(labels));
}

RleMask BoxMask(int x, int y, int w, int h, int frame_width, int frame_height) {
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(frame_width) * frame_height, 0);
  for (int yy = y; yy < y + h; ++yy) {
    for (int xx = x; xx < x + w; ++xx) raster[static_cast<std::size_t>(yy) * frame_width + xx] = 1;
  }
  return RleMask::FromRaster(raster, frame_height, frame_width);
}

DetectionSet RandomDetections(std::mt19937& rng, const FrameRef& frame, int max_count,
                              int class_count) {
  std::uniform_int_distribution<int> count(1, max_count);
  std::uniform_int_distribution<int> cls(0, class_count - 1);
  std::uniform_real_distribution<double> score(0.05, 1.0);
  DetectionSet set{frame, {}, {}};
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> w(2, std::max(2, frame.width / 2));
    std::uniform_int_distribution<int> h(2, std::max(2, frame.height / 2));
    const int bw = w(rng), bh = h(rng);
    std::uniform_int_distribution<int> x(0, frame.width - bw);
    std::uniform_int_distribution<int> y(0, frame.height - bh);
    const int bx = x(rng), by = y(rng);
    // An ellipse inscribed in the box, so masks and boxes disagree a bit.
    std::vector<std::uint8_t> raster(static_cast<std::size_t>(frame.width) * frame.height, 0);
    const double cx = bx + bw / 2.0, cy = by + bh / 2.0;
    for (int yy = by; yy < by + bh; ++yy) {
      for (int xx = bx; xx < bx + bw; ++xx) {
        const double dx = (xx + 0.5 - cx) / (bw / 2.0), dy = (yy + 0.5 - cy) / (bh / 2.0);
        if (dx * dx + dy * dy <= 1.0) raster[static_cast<std::size_t>(yy) * frame.width + xx] = 1;
      }
    }
    Detection d;
    d.class_id = cls(rng);
    d.score = score(rng);
    d.bbox = {static_cast<double>(bx), static_cast<double>(by), static_cast<double>(bw),
              static_cast<double>(bh)};
    d.mask = RleMask::FromRaster(raster, frame.height, frame.width);
    set.detections.push_back(std::move(d));
  }
  return set;
}

DetectionCase RandomDetectionCase(std::mt19937& rng, int max_dets, int max_refs,
                                  int class_count) {
  const int size = 32;
  FrameRef frame = MakeFrame("case", 0, size, size);
  DetectionCase c{{frame, {}, {}}, {frame, {}, {}}};
  std::uniform_int_distribution<int> cls(0, class_count - 1);
  std::uniform_int_distribution<int> extent(4, 14);
  std::uniform_int_distribution<int> jitter(-3, 3);
  std::uniform_real_distribution<double> score(0.01, 1.0);
  std::bernoulli_distribution copy(0.7);
  auto clamp_box = [&](int x, int y, int w, int h) {
    w = std::max(1, w);
    h = std::max(1, h);
    x = std::clamp(x, 0, size - w);
    y = std::clamp(y, 0, size - h);
    return BBox{static_cast<double>(x), static_cast<double>(y), static_cast<double>(w),
                static_cast<double>(h)};
  };
  auto random_box = [&] {
    std::uniform_int_distribution<int> pos(0, size - 4);
    return clamp_box(pos(rng), pos(rng), extent(rng), extent(rng));
  };
  const int refs = std::uniform_int_distribution<int>(1, max_refs)(rng);
  for (int i = 0; i < refs; ++i) c.refs.instances.push_back({cls(rng), random_box(), {}});
  const int dets = std::uniform_int_distribution<int>(1, max_dets)(rng);
  for (int i = 0; i < dets; ++i) {
    Detection d;
    d.score = score(rng);
    if (copy(rng)) {
      const auto& r = c.refs.instances[std::uniform_int_distribution<int>(0, refs - 1)(rng)];
      d.class_id = r.class_id;
      d.bbox = clamp_box(static_cast<int>(r.bbox.x) + jitter(rng),
                         static_cast<int>(r.bbox.y) + jitter(rng),
                         static_cast<int>(r.bbox.w) + jitter(rng),
                         static_cast<int>(r.bbox.h) + jitter(rng));
    } else {
      d.class_id = cls(rng);
      d.bbox = random_box();
    }
    c.dets.detections.push_back(d);
  }
  return c;
}

bool HasDistinctIous(const DetectionCase& c) {
  std::vector<double> seen;
  std::vector<double> scores;
  for (const auto& d : c.dets.detections) {
    scores.push_back(d.score);
    for (const auto& r : c.refs.instances) {
      if (r.class_id != d.class_id) continue;
      const double v = oracle::RasterBoxIou(d.bbox, r.bbox);
      if (v > 0) seen.push_back(v);
    }
  }
  for (auto* v : {&seen, &scores}) {
    std::sort(v->begin(), v->end());
    if (std::adjacent_find(v->begin(), v->end()) != v->end()) return false;
  }
  return true;
}

Image RandomImage(std::mt19937& rng, int width, int height, int channels) {
  Image img(width, height, channels);
  std::uniform_int_distribution<int> v(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(v(rng));
  return img;
}

Image NaturalImage(int width, int height, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0, 3);
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double base = 128 + 70 * std::sin(0.07 * x + c) * std::cos(0.05 * y - c) +
                            30.0 * x / width;
        img.at(x, y, c) =
            static_cast<std::uint8_t>(std::clamp(std::round(base + noise(rng)), 0.0, 255.0));
      }
    }
  }
  return img;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace vcm::testing

namespace vcm::oracle {

SegScores BruteForceSegMetrics(const std::vector<LabelMap>& gts,
                               const std::vector<LabelMap>& preds) {
  const int classes = gts.front().class_count();
  const int ignore = gts.front().ignore_id();
  std::vector<std::int64_t> tp(classes, 0), fp(classes, 0), fn(classes, 0), ref(classes, 0);
  std::int64_t valid = 0, correct = 0;
  for (std::size_t f = 0; f < gts.size(); ++f) {
    const auto& g = gts[f].labels();
    const auto& p = preds[f].labels();
    for (int c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const bool in_gt = g[i] == c;
        const bool in_pred = p[i] == c;
        if (g[i] == ignore) continue;
        if (in_gt && in_pred) ++tp[c];
        if (!in_gt && in_pred) ++fp[c];
        if (in_gt && !in_pred) ++fn[c];
        if (in_gt) ++ref[c];
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] == ignore) continue;
      ++valid;
      if (p[i] == g[i]) ++correct;
    }
  }
  SegScores s;
  double iou_sum = 0;
  int defined = 0;
  double fw = 0;
  for (int c = 0; c < classes; ++c) {
    const std::int64_t den = tp[c] + fp[c] + fn[c];
    if (den == 0) continue;
    const double iou = static_cast<double>(tp[c]) / static_cast<double>(den);
    iou_sum += iou;
    ++defined;
    fw += static_cast<double>(ref[c]) * iou;
  }
  if (defined > 0) s.miou = iou_sum / defined;
  if (valid > 0) {
    s.oacc = static_cast<double>(correct) / static_cast<double>(valid);
    s.frwacc = fw / static_cast<double>(valid);
  }
  return s;
}

double RasterBoxIou(const BBox& a, const BBox& b) {
  // Exact for integer boxes; sampled on a fine grid otherwise.
  const double x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
  const double step = 0.25;
  std::int64_t inter = 0, uni = 0;
  for (double y = y0 + step / 2; y < y1; y += step) {
    for (double x = x0 + step / 2; x < x1; x += step) {
      const bool ia = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool ib = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double RasterMaskIou(const RleMask& a, const RleMask& b) {
  const auto ra = a.ToRaster(), rb = b.ToRaster();
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    inter += ra[i] && rb[i];
    uni += ra[i] || rb[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

void Search(const std::vector<std::vector<double>>& iou, const std::vector<int>& det_class,
            const std::vector<int>& ref_class, double threshold, std::size_t d,
            std::vector<int>& current, std::vector<bool>& used, std::vector<int>& best,
            std::vector<double>& best_key) {
  if (d == iou.size()) {
    std::vector<double> key;
    for (std::size_t i = 0; i < current.size(); ++i) {
      key.push_back(current[i] < 0 ? -1.0 : iou[i][current[i]]);
    }
    if (best_key.empty() || key > best_key) {
      best_key = key;
      best = current;
    }
    return;
  }
  current[d] = -1;
  Search(iou, det_class, ref_class, threshold, d + 1, current, used, best, best_key);
  for (std::size_t r = 0; r < ref_class.size(); ++r) {
    if (used[r] || ref_class[r] != det_class[d] || iou[d][r] < threshold) continue;
    used[r] = true;
    current[d] = static_cast<int>(r);
    Search(iou, det_class, ref_class, threshold, d + 1, current, used, best, best_key);
    used[r] = false;
    current[d] = -1;
  }
}

}  // namespace

std::vector<int> ExhaustiveAssignment(const std::vector<std::vector<double>>& iou,
                                      const std::vector<int>& det_class,
                                      const std::vector<int>& ref_class, double threshold) {
  std::vector<int> current(iou.size(), -1), best(iou.size(), -1);
  std::vector<bool> used(ref_class.size(), false);
  std::vector<double> best_key;
  Search(iou, det_class, ref_class, threshold, 0, current, used, best, best_key);
  return best;
}

double Ap101(const std::vector<bool>& tp, int positives) {
  std::vector<double> precision, recall;
  int hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    hits += tp[k] ? 1 : 0;
    precision.push_back(static_cast<double>(hits) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(hits) / positives);
  }
  double sum = 0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double best = 0;
    for (std::size_t k = 0; k < tp.size(); ++k) {
      if (recall[k] >= r) best = std::max(best, precision[k]);
    }
    sum += best;
  }
  return sum / 101.0;
}

std::optional<double> ExhaustiveMeanAp(const DetectionSet& dets, const InstanceSet& refs,
                                       int class_id, const std::vector<double>& thresholds) {
  int positives = 0;
  for (const auto& r : refs.instances) positives += r.class_id == class_id;
  if (positives == 0) return std::nullopt;
  std::vector<std::size_t> order(dets.detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets.detections[a].score > dets.detections[b].score;
  });
  std::vector<std::vector<double>> iou;
  std::vector<int> det_class, ref_class;
  for (std::size_t i : order) {
    std::vector<double> row;
    for (const auto& r : refs.instances) row.push_back(RasterBoxIou(dets.detections[i].bbox, r.bbox));
    iou.push_back(row);
    det_class.push_back(dets.detections[i].class_id);
  }
  for (const auto& r : refs.instances) ref_class.push_back(r.class_id);
  double sum = 0;
  for (double t : thresholds) {
    const auto assignment = ExhaustiveAssignment(iou, det_class, ref_class, t);
    std::vector<bool> tp;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (det_class[k] == class_id) tp.push_back(assignment[k] >= 0);
    }
    sum += Ap101(tp, positives);
  }
  return sum / static_cast<double>(thresholds.size());
}

double LagrangeEval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  double sum = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double term = ys[i];
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j != i) term *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    sum += term;
  }
  return sum;
}

double TrapezoidBdRate(const std::vector<RdPoint>& anchor, const std::vector<RdPoint>& test,
                       int samples) {
  auto split = [](const std::vector<RdPoint>& pts, std::vector<double>& v,
                  std::vector<double>& lr) {
    for (const auto& p : pts) {
      v.push_back(p.value);
      lr.push_back(std::log10(p.rate));
    }
  };
  std::vector<double> va, la, vt, lt;
  split(anchor, va, la);
  split(test, vt, lt);
  const double lo = std::max(*std::min_element(va.begin(), va.end()),
                             *std::min_element(vt.begin(), vt.end()));
  const double hi = std::min(*std::max_element(va.begin(), va.end()),
                             *std::max_element(vt.begin(), vt.end()));
  const double h = (hi - lo) / samples;
  double integral = 0;
  for (int i = 0; i <= samples; ++i) {
    const double v = lo + h * i;
    const double diff = LagrangeEval(vt, lt, v) - LagrangeEval(va, la, v);
    integral += (i == 0 || i == samples ? 0.5 : 1.0) * diff;
  }
  const double avg = integral * h / (hi - lo);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

double Psnr(const Image& a, const Image& b) {
  double se = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.pixels.size());
  if (mse == 0) return INFINITY;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace vcm::oracle
