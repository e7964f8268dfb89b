#ifndef VCM_QUALITY_METRICS_H_
#define VCM_QUALITY_METRICS_H_

#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcm/image.h"

namespace vcm {

enum class PsnrColor {
  // Per-sample MSE over every channel of the raster as stored.
  kRaster,
  // BT.601 luma of RGB inputs; gray inputs are used as-is.
  kLuma,
};

PsnrColor ParsePsnrColor(std::string_view s);

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

// Mean squared error between two rasters of equal shape. Throws InputError
// on dimension or channel mismatch.
double MeanSquaredError(const Image& reference, const Image& distorted,
                        PsnrColor color = PsnrColor::kRaster);

// 10 log10(255^2 / MSE); kPsnrInfinity for identical images.
double Psnr(const Image& reference, const Image& distorted,
            PsnrColor color = PsnrColor::kRaster);
double PsnrFromMse(double mse);

struct SequencePsnr {
  // Arithmetic mean of finite per-frame PSNR values.
  double mean_psnr = 0;
  // PSNR of the mean MSE.
  double pooled_psnr = 0;
  int infinite_frames = 0;
  std::vector<std::string> warnings;
};

// Per-frame MSEs in, both pooling conventions out. Throws
// UndefinedMetricError when the list is empty.
SequencePsnr PoolPsnr(std::span<const double> frame_mse);
SequencePsnr SequencePsnrOf(std::span<const Image> reference,
                            std::span<const Image> distorted,
                            PsnrColor color = PsnrColor::kRaster);

struct VmafScores {
  std::map<int, double> per_frame;
  double Mean() const;
};

// Parses the reference VMAF tool's JSON log: a "frames" array whose entries
// carry a "vmaf" score either directly or under "metrics". Frame keys come
// from "frameNum" when present, otherwise array position.
VmafScores ParseVmaf(std::string_view json_text);
VmafScores IngestVmaf(const std::filesystem::path& path);

}  // namespace vcm

#endif  // VCM_QUALITY_METRICS_H_
