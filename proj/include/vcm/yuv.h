#ifndef VCM_YUV_H_
#define VCM_YUV_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vcm/image.h"

namespace vcm {

// Planar 8-bit YCbCr 4:2:0. Chroma planes are ceil(w/2) x ceil(h/2).
struct Yuv420Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> y;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> v;

  int chroma_width() const { return (width + 1) / 2; }
  int chroma_height() const { return (height + 1) / 2; }
  std::size_t byte_size() const { return y.size() + u.size() + v.size(); }
  bool operator==(const Yuv420Frame&) const = default;
};

// BT.601 limited-range conversion. Chroma is the mean of each 2x2 block
// (fewer samples at odd edges), rounded half away from zero. Gray input is
// treated as R = G = B.
Yuv420Frame RgbToYuv420(const Image& image);
// Nearest-neighbour chroma upsampling, clamped to [0, 255]. Returns 3
// channels.
Image Yuv420ToRgb(const Yuv420Frame& frame);

// Appends frames back to back (Y, U, V planes per frame).
void WriteYuv420File(const std::filesystem::path& path,
                     std::span<const Yuv420Frame> frames);
// Throws InputError if the file size is not frame_count whole frames.
std::vector<Yuv420Frame> ReadYuv420File(const std::filesystem::path& path,
                                        int width, int height, int frame_count);

}  // namespace vcm

#endif  // VCM_YUV_H_
