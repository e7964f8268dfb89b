#include "vcm/image.h"

#include <png.h>

#include <atomic>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

namespace fs = std::filesystem;

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w),
      height(h),
      channels(c),
      pixels(static_cast<std::size_t>(w) * h * c, fill) {}

namespace {

struct PngReader {
  png_image image;
  explicit PngReader(const fs::path& path) {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!fs::exists(path)) {
      throw InputError(fmt::format("file not found: {}", path.string()));
    }
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
      throw InputError(
          fmt::format("cannot decode PNG {}: {}", path.string(), image.message));
    }
  }
  ~PngReader() { png_image_free(&image); }
};

}  // namespace

Image ReadPng(const fs::path& path) {
  PngReader reader(path);
  png_image& img = reader.image;
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    throw InputError(fmt::format("{}: only 8-bit PNG is supported", path.string()));
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height),
            color ? 3 : 1);
  if (out.width == 0 || out.height == 0) {
    throw InputError(fmt::format("{}: zero image dimension", path.string()));
  }
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    throw InputError(
        fmt::format("cannot decode PNG {}: {}", path.string(), img.message));
  }
  return out;
}

std::pair<int, int> ReadPngSize(const fs::path& path) {
  PngReader reader(path);
  return {static_cast<int>(reader.image.width),
          static_cast<int>(reader.image.height)};
}

std::vector<std::uint8_t> EncodePng(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InputError(fmt::format("cannot encode {}-channel image", image.channels));
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0,
                                 nullptr)) {
    throw InputError(fmt::format("PNG encode failed: {}", img.message));
  }
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0,
                                 image.pixels.data(), 0, nullptr)) {
    throw InputError(fmt::format("PNG encode failed: {}", img.message));
  }
  bytes.resize(size);
  png_image_free(&img);
  return bytes;
}

void WritePng(const fs::path& path, const Image& image) {
  const auto bytes = EncodePng(image);
  WriteFileAtomic(path, bytes);
}

void WriteFileAtomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(fmt::format("cannot write {}: {}", path.string(), ec.message()));
  const auto tmp = fs::path(path.string() +
                            fmt::format(".tmp{}.{}", ::getpid(), counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(fmt::format("cannot write {}", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(fmt::format("cannot write {}: {}", path.string(), ec.message()));
  }
}

void WriteFileAtomic(const fs::path& path, std::string_view text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("file not found: {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vcm
