#include "vcm/quality_metrics.h"

#include <cmath>

#include <fmt/format.h>

#include "json.hpp"
#include "vcm/error.h"

namespace vcm {

PsnrColor ParsePsnrColor(std::string_view s) {
  if (s == "raster" || s == "rgb") return PsnrColor::kRaster;
  if (s == "luma") return PsnrColor::kLuma;
  throw ConfigError(fmt::format("unknown PSNR color mode '{}'", s));
}

namespace {

double Luma(const Image& img, std::size_t pixel) {
  if (img.channels == 1) return img.pixels[pixel];
  const auto* p = &img.pixels[pixel * 3];
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

}  // namespace

double MeanSquaredError(const Image& reference, const Image& distorted,
                        PsnrColor color) {
  if (reference.width != distorted.width || reference.height != distorted.height ||
      reference.channels != distorted.channels) {
    throw InputError(fmt::format("image mismatch: {}x{}x{} vs {}x{}x{}",
                                 reference.width, reference.height,
                                 reference.channels, distorted.width,
                                 distorted.height, distorted.channels));
  }
  if (reference.pixels.empty()) throw InputError("empty image");
  if (color == PsnrColor::kLuma) {
    const std::size_t n = static_cast<std::size_t>(reference.width) * reference.height;
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = Luma(reference, i) - Luma(distorted, i);
      sum += d * d;
    }
    return sum / static_cast<double>(n);
  }
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const int d = int{reference.pixels[i]} - int{distorted.pixels[i]};
    sum += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(sum) / static_cast<double>(reference.pixels.size());
}

double PsnrFromMse(double mse) {
  if (mse <= 0) return kPsnrInfinity;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double Psnr(const Image& reference, const Image& distorted, PsnrColor color) {
  return PsnrFromMse(MeanSquaredError(reference, distorted, color));
}

SequencePsnr PoolPsnr(std::span<const double> frame_mse) {
  if (frame_mse.empty()) {
    throw UndefinedMetricError("sequence PSNR undefined: no frames");
  }
  SequencePsnr out;
  double psnr_sum = 0;
  double mse_sum = 0;
  int finite = 0;
  for (double mse : frame_mse) {
    mse_sum += mse;
    const double p = PsnrFromMse(mse);
    if (std::isinf(p)) {
      ++out.infinite_frames;
    } else {
      psnr_sum += p;
      ++finite;
    }
  }
  if (out.infinite_frames > 0) {
    out.warnings.push_back(fmt::format(
        "{} identical frame(s) excluded from the per-frame PSNR mean",
        out.infinite_frames));
  }
  out.mean_psnr = finite > 0 ? psnr_sum / finite : kPsnrInfinity;
  out.pooled_psnr = PsnrFromMse(mse_sum / static_cast<double>(frame_mse.size()));
  return out;
}

SequencePsnr SequencePsnrOf(std::span<const Image> reference,
                            std::span<const Image> distorted, PsnrColor color) {
  if (reference.size() != distorted.size()) {
    throw InputError("reference and distorted sequences differ in length");
  }
  std::vector<double> mse;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    mse.push_back(MeanSquaredError(reference[i], distorted[i], color));
  }
  return PoolPsnr(mse);
}

double VmafScores::Mean() const {
  if (per_frame.empty()) throw UndefinedMetricError("no VMAF scores");
  double sum = 0;
  for (const auto& [k, v] : per_frame) sum += v;
  return sum / static_cast<double>(per_frame.size());
}

VmafScores ParseVmaf(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(fmt::format("malformed VMAF log: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array()) {
    throw InputError("VMAF log has no per-frame \"frames\" array");
  }
  const auto& frames = j["frames"];
  if (frames.empty()) throw InputError("VMAF log has an empty frame list");
  VmafScores out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const nlohmann::json* score = nullptr;
    if (f.contains("vmaf")) {
      score = &f["vmaf"];
    } else if (f.contains("metrics") && f["metrics"].contains("vmaf")) {
      score = &f["metrics"]["vmaf"];
    }
    if (score == nullptr || !score->is_number()) {
      throw InputError(fmt::format("VMAF frame {} has no numeric \"vmaf\" field", i));
    }
    const double v = score->get<double>();
    if (!(v >= 0.0 && v <= 100.0)) {
      throw InputError(fmt::format("VMAF frame {}: score out of range ({})", i, v));
    }
    const int key = f.contains("frameNum") ? f["frameNum"].get<int>()
                                           : static_cast<int>(i);
    if (!out.per_frame.emplace(key, v).second) {
      throw InputError(fmt::format("VMAF log repeats frame {}", key));
    }
  }
  return out;
}

VmafScores IngestVmaf(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
    return ParseVmaf(text);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace vcm
