#ifndef VCM_IMAGE_H_
#define VCM_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vcm {

// Interleaved 8-bit raster with 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0);

  std::size_t sample_count() const { return pixels.size(); }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

// Reads an 8-bit PNG. Gray and gray+alpha become 1 channel; RGB, RGBA and
// palette images become 3 channels. Throws InputError.
Image ReadPng(const std::filesystem::path& path);

// Reads only the header and returns {width, height}.
std::pair<int, int> ReadPngSize(const std::filesystem::path& path);

// Encodes with fixed compression settings so output bytes are a pure
// function of the raster.
std::vector<std::uint8_t> EncodePng(const Image& image);

// Writes via a temporary file and rename.
void WritePng(const std::filesystem::path& path, const Image& image);

// Writes bytes atomically (temp file + rename), creating parent dirs.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view text);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace vcm

#endif  // VCM_IMAGE_H_
