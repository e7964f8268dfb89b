#include "vcm/toy.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/rle.h"

namespace vcm {

namespace fs = std::filesystem;

namespace {

using Rgb = std::array<double, 3>;

constexpr int kGridCols = 3;
constexpr int kGridRows = 2;
constexpr double kTexture = 8;
constexpr double kEdgeWidth = 12;
constexpr double kNoise = 4;

// Index = semantic class.
constexpr std::array<Rgb, kToySemanticClasses> kPrototypes = {{
    {120, 120, 120},
    {165, 95, 85},
    {95, 150, 105},
    {95, 105, 160},
}};

struct ToyObject {
  int cls = 1;
  bool ellipse = false;
  double cx = 0, cy = 0;
  double half_w = 0, half_h = 0;
  double vx = 0, vy = 0;
  double shade = 0;
};

std::vector<ToyObject> SceneObjects(std::uint32_t seed, int width, int height) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ToyObject> objects;
  // One object per grid cell so objects never touch.
  const double cell_w = static_cast<double>(width) / kGridCols;
  const double cell_h = static_cast<double>(height - kToyIgnoreRows) / kGridRows;
  for (int gy = 0; gy < kGridRows; ++gy) {
    for (int gx = 0; gx < kGridCols; ++gx) {
      ToyObject o;
      o.cls = 1 + static_cast<int>(u(rng) * 3) % 3;
      o.ellipse = o.cls == 2;
      o.half_w = cell_w * (0.22 + 0.1 * u(rng));
      o.half_h = cell_h * (0.22 + 0.1 * u(rng));
      o.cx = cell_w * (gx + 0.5) + (u(rng) - 0.5) * cell_w * 0.15;
      o.cy = cell_h * (gy + 0.5) + (u(rng) - 0.5) * cell_h * 0.15;
      o.vx = u(rng) < 0.5 ? -1.0 : 1.0;
      o.vy = (u(rng) - 0.5);
      o.shade = 10 + 10 * u(rng);
      objects.push_back(o);
    }
  }
  return objects;
}

// Signed distance to the object outline in pixels, positive inside.
double InsideDistance(const ToyObject& o, double x, double y) {
  const double dx = (x - o.cx) / o.half_w, dy = (y - o.cy) / o.half_h;
  const double r = o.ellipse ? std::sqrt(dx * dx + dy * dy) : std::max(std::abs(dx), std::abs(dy));
  return (1.0 - r) * std::min(o.half_w, o.half_h);
}

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

double Dist2(const Rgb& a, const Rgb& b) {
  double d = 0;
  for (int c = 0; c < 3; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
  return d;
}

std::vector<Rgb> BoxBlur(const Image& image) {
  std::vector<Rgb> out(static_cast<std::size_t>(image.width) * image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      Rgb sum{0, 0, 0};
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= image.width || yy >= image.height) continue;
          for (int c = 0; c < 3; ++c) {
            sum[c] += image.at(xx, yy, image.channels == 3 ? c : 0);
          }
          ++n;
        }
      }
      for (auto& v : sum) v /= n;
      out[static_cast<std::size_t>(y) * image.width + x] = sum;
    }
  }
  return out;
}

// Per pixel: best class and a margin in [0, 1].
struct Classified {
  std::vector<std::uint8_t> labels;
  std::vector<double> margin;
};

Classified Classify(const Image& image) {
  const auto blurred = BoxBlur(image);
  Classified out;
  out.labels.resize(blurred.size());
  out.margin.resize(blurred.size());
  for (std::size_t i = 0; i < blurred.size(); ++i) {
    double best = 1e300, second = 1e300;
    int best_c = 0;
    for (int c = 0; c < kToySemanticClasses; ++c) {
      const double d = Dist2(blurred[i], kPrototypes[c]);
      if (d < best) {
        second = best;
        best = d;
        best_c = c;
      } else if (d < second) {
        second = d;
      }
    }
    out.labels[i] = static_cast<std::uint8_t>(best_c);
    out.margin[i] = (second - best) / (second + best + 1e-9);
  }
  return out;
}

}  // namespace

ToyScene RenderToyScene(std::uint32_t sequence_seed, const FrameRef& frame) {
  const int w = frame.width, h = frame.height;
  if (w < 16 || h < 16) throw InputError("toy scenes need at least 16x16 pixels");
  auto objects = SceneObjects(sequence_seed, w, h);
  for (auto& o : objects) {
    o.cx += o.vx * frame.frame_index;
    o.cy += o.vy * frame.frame_index;
  }
  std::mt19937 rng(sequence_seed * 7919u + static_cast<std::uint32_t>(frame.frame_index));
  std::uniform_real_distribution<double> noise(-kNoise, kNoise);
  const double phase = (sequence_seed % 17) * 0.37;

  Image image;
  image.width = w;
  image.height = h;
  image.channels = 3;
  image.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::vector<std::uint8_t>> masks(objects.size(),
                                               std::vector<std::uint8_t>(labels.size(), 0));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      Rgb color = kPrototypes[0];
      const double texture = kTexture * std::sin(0.31 * x + phase) * std::cos(0.23 * y - phase);
      for (auto& v : color) v += texture;
      for (std::size_t k = 0; k < objects.size(); ++k) {
        const auto& o = objects[k];
        const double d = InsideDistance(o, x + 0.5, y + 0.5);
        // Edges fade into the background over a couple of pixels.
        const double alpha = std::clamp(0.5 + d / kEdgeWidth, 0.0, 1.0);
        if (alpha <= 0) continue;
        Rgb fg = kPrototypes[o.cls];
        const double t = (x + 0.5 - o.cx) / o.half_w;
        for (auto& v : fg) v += o.shade * t;
        for (int c = 0; c < 3; ++c) color[c] = alpha * fg[c] + (1 - alpha) * color[c];
        if (d >= 0 && y < h - kToyIgnoreRows) {
          labels[i] = static_cast<std::uint8_t>(o.cls);
          masks[k][i] = 1;
        }
      }
      for (int c = 0; c < 3; ++c) image.pixels[i * 3 + c] = ToByte(color[c] + noise(rng));
      if (y >= h - kToyIgnoreRows) labels[i] = kDefaultIgnoreId;
    }
  }

  ToyScene scene{std::move(image),
                 LabelMap(w, h, kToySemanticClasses, kDefaultIgnoreId, labels),
                 InstanceSet{frame, {}, {}}};
  for (std::size_t k = 0; k < objects.size(); ++k) {
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!masks[k][static_cast<std::size_t>(y) * w + x]) continue;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
    if (x1 < 0) continue;
    Instance inst;
    inst.class_id = objects[k].cls - 1;
    inst.bbox = {static_cast<double>(x0), static_cast<double>(y0),
                 static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)};
    inst.mask = RleMask::FromRaster(masks[k], h, w);
    scene.instances.instances.push_back(std::move(inst));
  }
  return scene;
}

LabelMap ToySegment(const Image& image) {
  Classified c = Classify(image);
  return LabelMap(image.width, image.height, kToySemanticClasses, kDefaultIgnoreId,
                  std::move(c.labels));
}

DetectionSet ToyDetect(const Image& image, const FrameRef& frame) {
  constexpr int kMinArea = 12;
  const Classified c = Classify(image);
  const int w = image.width, h = image.height;
  std::vector<int> component(c.labels.size(), -1);
  DetectionSet out{frame, {}, {}};
  std::vector<std::size_t> stack;
  int next_id = 0;
  for (std::size_t seed = 0; seed < c.labels.size(); ++seed) {
    if (c.labels[seed] == 0 || component[seed] >= 0) continue;
    const int id = next_id++;
    const std::uint8_t cls = c.labels[seed];
    std::vector<std::size_t> pixels;
    stack.assign(1, seed);
    component[seed] = id;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      pixels.push_back(i);
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (component[j] < 0 && c.labels[j] == cls) {
          component[j] = id;
          stack.push_back(j);
        }
      }
    }
    if (static_cast<int>(pixels.size()) < kMinArea) continue;
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    double margin = 0;
    std::vector<std::uint8_t> raster(c.labels.size(), 0);
    for (std::size_t i : pixels) {
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      margin += c.margin[i];
      raster[i] = 1;
    }
    margin /= static_cast<double>(pixels.size());
    Detection d;
    d.class_id = cls - 1;
    d.score = std::clamp(0.15 + 0.85 * margin + 0.002 * static_cast<double>(pixels.size()) / 10.0,
                         0.0, 1.0);
    d.bbox = {static_cast<double>(x0), static_cast<double>(y0),
              static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)};
    d.mask = RleMask::FromRaster(raster, h, w);
    out.detections.push_back(std::move(d));
  }
  return out;
}

void ToyPredictor::Predict(const ModelSpec& model, const Image& image, const FrameRef& frame,
                           const fs::path& output) const {
  if (model.task == Task::kSemantic) {
    SaveLabelMap(output, ToySegment(image));
  } else {
    SaveDetections(output, ToyDetect(image, frame));
  }
}

std::vector<FrameRef> WriteToyDataset(const fs::path& root, int sequences,
                                      int frames_per_sequence, int width, int height) {
  std::vector<FrameRef> frames;
  for (int s = 0; s < sequences; ++s) {
    const std::string seq = fmt::format("seq{:02d}", s);
    for (int f = 0; f < frames_per_sequence; ++f) {
      FrameRef ref;
      ref.dataset_id = "toy";
      ref.sequence_id = seq;
      ref.frame_index = f;
      ref.width = width;
      ref.height = height;
      ref.image_path = root / "images" / seq / fmt::format("{}.png", f);
      const ToyScene scene = RenderToyScene(static_cast<std::uint32_t>(101 + 37 * s), ref);
      WritePng(ref.image_path, scene.image);
      SaveLabelMap(root / "gt" / "semantic" / seq / fmt::format("{}.png", f), scene.semantic);
      SaveAnnotations(root / "gt" / "instances" / seq / fmt::format("{}.json", f),
                      scene.instances);
      frames.push_back(std::move(ref));
    }
  }
  return frames;
}

}  // namespace vcm
