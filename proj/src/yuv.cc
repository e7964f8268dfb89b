#include "vcm/yuv.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

namespace {

constexpr double kKr = 0.299;
constexpr double kKb = 0.114;
constexpr double kKg = 1.0 - kKr - kKb;

std::uint8_t ClampRound(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

}  // namespace

Yuv420Frame RgbToYuv420(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InputError(fmt::format("cannot convert {}-channel image", image.channels));
  }
  Yuv420Frame f;
  f.width = image.width;
  f.height = image.height;
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
  f.y.resize(n);
  std::vector<double> cb(n), cr(n);
  for (int yy = 0; yy < f.height; ++yy) {
    for (int xx = 0; xx < f.width; ++xx) {
      double r, g, b;
      if (image.channels == 3) {
        r = image.at(xx, yy, 0);
        g = image.at(xx, yy, 1);
        b = image.at(xx, yy, 2);
      } else {
        r = g = b = image.at(xx, yy);
      }
      const double luma = kKr * r + kKg * g + kKb * b;
      const std::size_t i = static_cast<std::size_t>(yy) * f.width + xx;
      f.y[i] = ClampRound(16.0 + 219.0 / 255.0 * luma);
      cb[i] = 128.0 + 224.0 / 255.0 * (b - luma) / (2.0 * (1.0 - kKb));
      cr[i] = 128.0 + 224.0 / 255.0 * (r - luma) / (2.0 * (1.0 - kKr));
    }
  }
  const int cw = f.chroma_width();
  const int ch = f.chroma_height();
  f.u.resize(static_cast<std::size_t>(cw) * ch);
  f.v.resize(f.u.size());
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      double su = 0, sv = 0;
      int count = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int x = 2 * cx + dx;
          const int y = 2 * cy + dy;
          if (x >= f.width || y >= f.height) continue;
          const std::size_t i = static_cast<std::size_t>(y) * f.width + x;
          su += cb[i];
          sv += cr[i];
          ++count;
        }
      }
      const std::size_t ci = static_cast<std::size_t>(cy) * cw + cx;
      f.u[ci] = ClampRound(su / count);
      f.v[ci] = ClampRound(sv / count);
    }
  }
  return f;
}

Image Yuv420ToRgb(const Yuv420Frame& frame) {
  Image out(frame.width, frame.height, 3);
  const int cw = frame.chroma_width();
  for (int yy = 0; yy < frame.height; ++yy) {
    for (int xx = 0; xx < frame.width; ++xx) {
      const std::size_t ci = static_cast<std::size_t>(yy / 2) * cw + xx / 2;
      const double luma =
          (frame.y[static_cast<std::size_t>(yy) * frame.width + xx] - 16.0) * 255.0 / 219.0;
      const double pb = (frame.u[ci] - 128.0) * 255.0 / 224.0;
      const double pr = (frame.v[ci] - 128.0) * 255.0 / 224.0;
      const double r = luma + 2.0 * (1.0 - kKr) * pr;
      const double b = luma + 2.0 * (1.0 - kKb) * pb;
      const double g = (luma - kKr * r - kKb * b) / kKg;
      out.at(xx, yy, 0) = ClampRound(r);
      out.at(xx, yy, 1) = ClampRound(g);
      out.at(xx, yy, 2) = ClampRound(b);
    }
  }
  return out;
}

void WriteYuv420File(const std::filesystem::path& path,
                     std::span<const Yuv420Frame> frames) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  for (const auto& f : frames) {
    for (const auto* plane : {&f.y, &f.u, &f.v}) {
      out.write(reinterpret_cast<const char*>(plane->data()),
                static_cast<std::streamsize>(plane->size()));
    }
  }
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
}

std::vector<Yuv420Frame> ReadYuv420File(const std::filesystem::path& path,
                                        int width, int height, int frame_count) {
  Yuv420Frame shape;
  shape.width = width;
  shape.height = height;
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  const std::size_t chroma =
      static_cast<std::size_t>(shape.chroma_width()) * shape.chroma_height();
  const std::size_t frame_bytes = luma + 2 * chroma;
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw InputError(fmt::format("file not found: {}", path.string()));
  if (size != frame_bytes * static_cast<std::size_t>(frame_count)) {
    throw InputError(fmt::format(
        "{}: {} bytes is not {} frames of {}x{} 4:2:0 ({} bytes each)", path.string(),
        size, frame_count, width, height, frame_bytes));
  }
  std::ifstream in(path, std::ios::binary);
  std::vector<Yuv420Frame> frames;
  for (int i = 0; i < frame_count; ++i) {
    Yuv420Frame f = shape;
    f.y.resize(luma);
    f.u.resize(chroma);
    f.v.resize(chroma);
    for (auto* plane : {&f.y, &f.u, &f.v}) {
      in.read(reinterpret_cast<char*>(plane->data()),
              static_cast<std::streamsize>(plane->size()));
    }
    if (!in) throw InputError(fmt::format("{}: short read", path.string()));
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace vcm
