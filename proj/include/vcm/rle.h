#ifndef VCM_RLE_H_
#define VCM_RLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vcm {

// Binary mask stored as COCO-style run lengths over the column-major
// (Fortran order) pixel sequence. Runs alternate 0,1,0,...; the first run
// counts zeros and may be empty.
class RleMask {
 public:
  RleMask() = default;
  // Throws InputError if the runs do not sum to height*width.
  RleMask(int height, int width, std::vector<std::uint32_t> counts);

  // `raster` is row-major, non-zero = foreground.
  static RleMask FromRaster(std::span<const std::uint8_t> raster, int height,
                            int width);
  // Inverse of the COCO compressed-string run encoding.
  static RleMask FromCocoString(int height, int width, std::string_view s);

  // Row-major 0/1 raster.
  std::vector<std::uint8_t> ToRaster() const;
  std::string ToCocoString() const;

  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::uint64_t Area() const;

  bool operator==(const RleMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint32_t> counts_;
};

struct RleOverlap {
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
};

// Intersection and union computed by walking both run lists.
// Throws InputError on dimension mismatch.
RleOverlap MaskOverlap(const RleMask& a, const RleMask& b);

}  // namespace vcm

#endif  // VCM_RLE_H_
