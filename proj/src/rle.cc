#include "vcm/rle.h"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "vcm/error.h"

namespace vcm {

RleMask::RleMask(int height, int width, std::vector<std::uint32_t> counts)
    : height_(height), width_(width), counts_(std::move(counts)) {
  if (height < 0 || width < 0) {
    throw InputError("mask dimensions must be non-negative");
  }
  const std::uint64_t total =
      std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  const auto expected = static_cast<std::uint64_t>(height) * width;
  if (total != expected) {
    throw InputError(fmt::format(
        "mask runs cover {} pixels, expected {}x{}={}", total, height, width,
        expected));
  }
}

RleMask RleMask::FromRaster(std::span<const std::uint8_t> raster, int height,
                            int width) {
  if (raster.size() != static_cast<std::size_t>(height) * width) {
    throw InputError("raster size does not match mask dimensions");
  }
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      const bool v = raster[static_cast<std::size_t>(y) * width + x] != 0;
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return RleMask(height, width, std::move(counts));
}

std::vector<std::uint8_t> RleMask::ToRaster() const {
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(height_) * width_, 0);
  std::size_t pos = 0;
  std::uint8_t v = 0;
  for (std::uint32_t run : counts_) {
    for (std::uint32_t k = 0; k < run; ++k, ++pos) {
      const std::size_t x = pos / height_;
      const std::size_t y = pos % height_;
      raster[y * width_ + x] = v;
    }
    v = !v;
  }
  return raster;
}

std::uint64_t RleMask::Area() const {
  std::uint64_t area = 0;
  for (std::size_t i = 1; i < counts_.size(); i += 2) area += counts_[i];
  return area;
}

// Same alphabet and delta scheme as the COCO mask API: each run is
// delta-coded against the run two positions back (from the third on), then
// written as little-endian 5-bit groups offset by '0'.
std::string RleMask::ToCocoString() const {
  std::string s;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    long long x = counts_[i];
    if (i > 2) x -= static_cast<long long>(counts_[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

RleMask RleMask::FromCocoString(int height, int width, std::string_view s) {
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    long long x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw InputError("truncated RLE string");
      const int c = s[p] - 48;
      if (c < 0 || c > 63) throw InputError("invalid character in RLE string");
      x |= static_cast<long long>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -1LL << (5 * k);
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0 || x > 0xffffffffLL) throw InputError("invalid run in RLE string");
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return RleMask(height, width, std::move(counts));
}

RleOverlap MaskOverlap(const RleMask& a, const RleMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw InputError(fmt::format("mask size mismatch: {}x{} vs {}x{}", a.height(),
                                 a.width(), b.height(), b.width()));
  }
  RleOverlap out;
  const auto& ca = a.counts();
  const auto& cb = b.counts();
  std::size_t ia = 0, ib = 0;
  std::uint64_t ra = ca.empty() ? 0 : ca[0];
  std::uint64_t rb = cb.empty() ? 0 : cb[0];
  bool va = false, vb = false;
  // Skip empty leading runs.
  auto advance = [](const std::vector<std::uint32_t>& c, std::size_t& i,
                    std::uint64_t& r, bool& v) {
    while (r == 0 && i + 1 < c.size()) {
      ++i;
      r = c[i];
      v = !v;
    }
  };
  advance(ca, ia, ra, va);
  advance(cb, ib, rb, vb);
  while (ra > 0 && rb > 0) {
    const std::uint64_t step = std::min(ra, rb);
    if (va || vb) out.union_area += step;
    if (va && vb) out.intersection += step;
    ra -= step;
    rb -= step;
    advance(ca, ia, ra, va);
    advance(cb, ib, rb, vb);
  }
  return out;
}

}  // namespace vcm
