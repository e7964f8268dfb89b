#ifndef VCM_CODEC_ADAPTER_H_
#define VCM_CODEC_ADAPTER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/datamodel.h"
#include "vcm/image.h"

namespace vcm {

enum class CodecKind {
  // Encoder/decoder binaries driven through command templates.
  kExternal,
  // Built-in scalar quantizer + PNG entropy stage.
  kMock,
};

struct CodecSpec {
  std::string codec_id;
  CodecKind kind = CodecKind::kExternal;
  // Placeholders: {input} {output} {qp} {width} {height} {frames} {config}.
  std::string encode_template;
  std::string decode_template;
  std::string config_id = "default";
  std::string pixel_format = "yuv420p";
  // Mock only: the quantizer behaves as if qp were lowered by this amount.
  int mock_qp_shift = 0;
  bool deterministic = true;
  int min_qp = 0;
  int max_qp = 51;
  std::vector<std::string> env_passthrough;
  // Free-form tool version recorded in the run manifest.
  std::string version;
};

// Throws ConfigError: empty id, templates missing {input}/{output} (and
// {qp} for the encoder), unsupported pixel format.
void ValidateCodecSpec(const CodecSpec& spec);
CodecSpec CodecSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const CodecSpec& spec);

struct EncodeResult {
  std::uint64_t bitstream_bytes = 0;
  // Present when the codec reports per-frame sizes; sums to 8*bitstream_bytes.
  std::optional<std::vector<std::uint64_t>> per_frame_bits;
  std::filesystem::path bitstream_path;
  // One decoded PNG per input frame, same order.
  std::vector<std::filesystem::path> decoded_paths;
  int qp = 0;
  double wall_time = 0;

  // Per-frame bit shares. Without codec-reported sizes the total is split
  // evenly with the remainder going to the first frames; shares always sum
  // to the exact bitstream size.
  std::vector<std::uint64_t> FrameShares() const;

  nlohmann::json ToJson() const;
  static EncodeResult FromJson(const nlohmann::json& j);
};

// Quantizer step of the mock codec: round(2^((qp - 4 - shift) / 6)), at
// least 1.
int MockQuantizerStep(int qp, int qp_shift = 0);

struct MockOutput {
  Image degraded;
  // PNG encoding of `degraded`; doubles as the mock bitstream.
  std::vector<std::uint8_t> bitstream;
  std::uint64_t rate_bits = 0;
};

// Uniform scalar quantization of every sample: reconstruction q*step with
// round-half-to-even on the quotient, q capped at 255/step so the level
// fits in 8 bits. Throws ConfigError for qp outside [0, 51].
MockOutput MockCodec(const Image& image, int qp, int qp_shift = 0);

// Encodes `frames` (one sequence, display order) at `qp`, decodes, and
// writes lossless PNGs to `decoded_dir/<frame_index>.png`. Scratch files
// and logs go to `workdir`. Throws CodecError on tool failure.
EncodeResult EncodeDecode(const CodecSpec& spec, std::span<const FrameRef> frames,
                          int qp, const std::filesystem::path& workdir,
                          const std::filesystem::path& decoded_dir);

// Bits per pixel for images; kbit/s when fps is given.
// Throws InputError for zero pixels or frames.
double RateFromBits(std::uint64_t bits, std::uint64_t pixels, int frame_count,
                    std::optional<double> fps);
double Bitrate(const EncodeResult& result, std::span<const FrameRef> frames,
               std::optional<double> fps = std::nullopt);

}  // namespace vcm

#endif  // VCM_CODEC_ADAPTER_H_
