#include "vcm/codec_adapter.h"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/log.h"
#include "vcm/subprocess.h"
#include "vcm/yuv.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool Contains(const std::string& s, std::string_view token) {
  return s.find(token) != std::string::npos;
}

}  // namespace

void ValidateCodecSpec(const CodecSpec& spec) {
  if (spec.codec_id.empty()) throw ConfigError("codec_id must not be empty");
  if (spec.min_qp > spec.max_qp) {
    throw ConfigError(fmt::format("codec {}: min_qp > max_qp", spec.codec_id));
  }
  if (spec.kind == CodecKind::kMock) return;
  for (const char* p : {"{input}", "{output}", "{qp}"}) {
    if (!Contains(spec.encode_template, p)) {
      throw ConfigError(fmt::format("codec {}: encode template lacks {} placeholder",
                                    spec.codec_id, p));
    }
  }
  for (const char* p : {"{input}", "{output}"}) {
    if (!Contains(spec.decode_template, p)) {
      throw ConfigError(fmt::format("codec {}: decode template lacks {} placeholder",
                                    spec.codec_id, p));
    }
  }
  if (spec.pixel_format != "yuv420p") {
    throw ConfigError(fmt::format("codec {}: unsupported pixel format '{}'",
                                  spec.codec_id, spec.pixel_format));
  }
}

CodecSpec CodecSpecFromJson(const json& j) {
  CodecSpec s;
  try {
    s.codec_id = j.at("codec_id").get<std::string>();
    const std::string kind = j.value("kind", "external");
    if (kind == "external") {
      s.kind = CodecKind::kExternal;
    } else if (kind == "mock") {
      s.kind = CodecKind::kMock;
    } else {
      throw ConfigError(fmt::format("codec {}: unknown kind '{}'", s.codec_id, kind));
    }
    s.encode_template = j.value("encode", "");
    s.decode_template = j.value("decode", "");
    s.config_id = j.value("config_id", "default");
    s.pixel_format = j.value("pixel_format", "yuv420p");
    s.mock_qp_shift = j.value("qp_shift", 0);
    s.deterministic = j.value("deterministic", true);
    s.min_qp = j.value("min_qp", 0);
    s.max_qp = j.value("max_qp", 51);
    s.env_passthrough = j.value("env", std::vector<std::string>{});
    s.version = j.value("version", "");
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("codec entry: {}", e.what()));
  }
  ValidateCodecSpec(s);
  return s;
}

json ToJson(const CodecSpec& s) {
  json j{{"codec_id", s.codec_id},
         {"kind", s.kind == CodecKind::kMock ? "mock" : "external"},
         {"config_id", s.config_id},
         {"pixel_format", s.pixel_format},
         {"deterministic", s.deterministic},
         {"min_qp", s.min_qp},
         {"max_qp", s.max_qp},
         {"version", s.version}};
  if (s.kind == CodecKind::kMock) {
    j["qp_shift"] = s.mock_qp_shift;
  } else {
    j["encode"] = s.encode_template;
    j["decode"] = s.decode_template;
    j["env"] = s.env_passthrough;
  }
  return j;
}

std::vector<std::uint64_t> EncodeResult::FrameShares() const {
  if (per_frame_bits) return *per_frame_bits;
  const std::uint64_t n = decoded_paths.size();
  std::vector<std::uint64_t> shares(n, 0);
  if (n == 0) return shares;
  const std::uint64_t bits = 8 * bitstream_bytes;
  for (std::uint64_t i = 0; i < n; ++i) shares[i] = bits / n + (i < bits % n ? 1 : 0);
  return shares;
}

json EncodeResult::ToJson() const {
  json paths = json::array();
  for (const auto& p : decoded_paths) paths.push_back(p.generic_string());
  json j{{"bitstream_bytes", bitstream_bytes},
         {"bitstream_path", bitstream_path.generic_string()},
         {"decoded_paths", std::move(paths)},
         {"qp", qp},
         {"wall_time", wall_time}};
  j["per_frame_bits"] = per_frame_bits ? json(*per_frame_bits) : json(nullptr);
  return j;
}

EncodeResult EncodeResult::FromJson(const json& j) {
  EncodeResult r;
  r.bitstream_bytes = j.at("bitstream_bytes").get<std::uint64_t>();
  r.bitstream_path = j.at("bitstream_path").get<std::string>();
  for (const auto& p : j.at("decoded_paths")) r.decoded_paths.emplace_back(p.get<std::string>());
  r.qp = j.at("qp").get<int>();
  r.wall_time = j.at("wall_time").get<double>();
  if (!j.at("per_frame_bits").is_null()) {
    r.per_frame_bits = j.at("per_frame_bits").get<std::vector<std::uint64_t>>();
  }
  return r;
}

int MockQuantizerStep(int qp, int qp_shift) {
  const long step = std::lround(std::pow(2.0, (qp - 4 - qp_shift) / 6.0));
  return static_cast<int>(std::max(1L, step));
}

MockOutput MockCodec(const Image& image, int qp, int qp_shift) {
  if (qp < 0 || qp > 51) {
    throw ConfigError(fmt::format("mock codec: qp {} outside [0, 51]", qp));
  }
  const int step = MockQuantizerStep(qp, qp_shift);
  MockOutput out;
  out.degraded = image;
  if (step > 1) {
    // Reconstruction levels are the multiples of step that fit in 8 bits.
    const int top = 255 / step;
    for (auto& v : out.degraded.pixels) {
      int q = v / step;
      const int r = v % step;
      if (2 * r > step || (2 * r == step && (q & 1))) ++q;
      v = static_cast<std::uint8_t>(std::min(top, q) * step);
    }
  }
  out.bitstream = EncodePng(out.degraded);
  out.rate_bits = 8 * static_cast<std::uint64_t>(out.bitstream.size());
  return out;
}

namespace {

EncodeResult RunMock(const CodecSpec& spec, std::span<const FrameRef> frames, int qp,
                     const fs::path& workdir, const fs::path& decoded_dir) {
  EncodeResult result;
  result.qp = qp;
  result.bitstream_path = workdir / "bitstream.bin";
  std::vector<std::uint8_t> stream;
  std::vector<std::uint64_t> bits;
  for (const auto& f : frames) {
    const MockOutput m = MockCodec(ReadPng(f.image_path), qp, spec.mock_qp_shift);
    stream.insert(stream.end(), m.bitstream.begin(), m.bitstream.end());
    bits.push_back(m.rate_bits);
    const fs::path out = decoded_dir / (std::to_string(f.frame_index) + ".png");
    WriteFileAtomic(out, m.bitstream);
    result.decoded_paths.push_back(out);
  }
  WriteFileAtomic(result.bitstream_path, stream);
  result.bitstream_bytes = fs::file_size(result.bitstream_path);
  result.per_frame_bits = std::move(bits);
  return result;
}

void RunTool(const CodecSpec& spec, const std::string& stage, const std::string& command,
             const fs::path& workdir) {
  log::Debug("{} {}: {}", spec.codec_id, stage, command);
  const auto r = RunShellCommand(command, workdir / "logs" / (stage + ".stdout.log"),
                                 workdir / "logs" / (stage + ".stderr.log"),
                                 spec.env_passthrough);
  if (r.exit_status != 0) {
    throw CodecError(fmt::format("codec {} {} exited with status {}: {}", spec.codec_id,
                                 stage, r.exit_status, r.stderr_tail));
  }
}

EncodeResult RunExternal(const CodecSpec& spec, std::span<const FrameRef> frames,
                         int qp, const fs::path& workdir, const fs::path& decoded_dir) {
  std::vector<Image> inputs;
  std::vector<Yuv420Frame> yuv;
  for (const auto& f : frames) {
    inputs.push_back(ReadPng(f.image_path));
    if (inputs.back().width != inputs.front().width ||
        inputs.back().height != inputs.front().height) {
      throw CodecError(fmt::format("codec {}: frames of one sequence differ in size",
                                   spec.codec_id));
    }
    yuv.push_back(RgbToYuv420(inputs.back()));
  }
  const int width = inputs.front().width;
  const int height = inputs.front().height;
  const fs::path input_yuv = workdir / "input.yuv";
  const fs::path decoded_yuv = workdir / "decoded.yuv";
  EncodeResult result;
  result.qp = qp;
  result.bitstream_path = workdir / "bitstream.bin";
  fs::remove(result.bitstream_path);
  fs::remove(decoded_yuv);
  WriteYuv420File(input_yuv, yuv);

  std::map<std::string, std::string> values{
      {"qp", std::to_string(qp)},
      {"width", std::to_string(width)},
      {"height", std::to_string(height)},
      {"frames", std::to_string(frames.size())},
      {"config", ShellQuote(spec.config_id)}};
  values["input"] = ShellQuote(input_yuv.string());
  values["output"] = ShellQuote(result.bitstream_path.string());
  RunTool(spec, "encode", ExpandTemplate(spec.encode_template, values), workdir);
  if (!fs::exists(result.bitstream_path)) {
    throw CodecError(fmt::format("codec {} encode produced no bitstream at {}",
                                 spec.codec_id, result.bitstream_path.string()));
  }
  values["input"] = ShellQuote(result.bitstream_path.string());
  values["output"] = ShellQuote(decoded_yuv.string());
  RunTool(spec, "decode", ExpandTemplate(spec.decode_template, values), workdir);
  if (!fs::exists(decoded_yuv)) {
    throw CodecError(fmt::format("codec {} decode produced no output at {}",
                                 spec.codec_id, decoded_yuv.string()));
  }
  std::vector<Yuv420Frame> decoded;
  try {
    decoded = ReadYuv420File(decoded_yuv, width, height,
                             static_cast<int>(frames.size()));
  } catch (const InputError& e) {
    throw CodecError(fmt::format("codec {}: dimension mismatch after decode: {}",
                                 spec.codec_id, e.what()));
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Image rgb = Yuv420ToRgb(decoded[i]);
    if (inputs[i].channels == 1) {
      Image gray(rgb.width, rgb.height, 1);
      for (std::size_t p = 0; p < gray.pixels.size(); ++p) gray.pixels[p] = rgb.pixels[3 * p];
      rgb = std::move(gray);
    }
    const fs::path out = decoded_dir / (std::to_string(frames[i].frame_index) + ".png");
    WritePng(out, rgb);
    result.decoded_paths.push_back(out);
  }
  result.bitstream_bytes = fs::file_size(result.bitstream_path);
  return result;
}

}  // namespace

EncodeResult EncodeDecode(const CodecSpec& spec, std::span<const FrameRef> frames,
                          int qp, const fs::path& workdir, const fs::path& decoded_dir) {
  ValidateCodecSpec(spec);
  if (qp < spec.min_qp || qp > spec.max_qp) {
    throw ConfigError(fmt::format("codec {}: qp {} outside [{}, {}]", spec.codec_id, qp,
                                  spec.min_qp, spec.max_qp));
  }
  if (frames.empty()) throw ConfigError("encode_decode called with no frames");
  fs::create_directories(workdir);
  fs::create_directories(decoded_dir);
  const auto start = std::chrono::steady_clock::now();
  EncodeResult result = spec.kind == CodecKind::kMock
                            ? RunMock(spec, frames, qp, workdir, decoded_dir)
                            : RunExternal(spec, frames, qp, workdir, decoded_dir);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double RateFromBits(std::uint64_t bits, std::uint64_t pixels, int frame_count,
                    std::optional<double> fps) {
  if (fps) {
    if (frame_count <= 0) throw InputError("bitrate undefined: zero frames");
    return static_cast<double>(bits) * *fps / (1000.0 * frame_count);
  }
  if (pixels == 0) throw InputError("bitrate undefined: zero pixels");
  return static_cast<double>(bits) / static_cast<double>(pixels);
}

double Bitrate(const EncodeResult& result, std::span<const FrameRef> frames,
               std::optional<double> fps) {
  std::uint64_t pixels = 0;
  for (const auto& f : frames) pixels += static_cast<std::uint64_t>(f.width) * f.height;
  return RateFromBits(8 * result.bitstream_bytes, pixels,
                      static_cast<int>(frames.size()), fps);
}

}  // namespace vcm
