#include "pdvoice/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pdvoice/errors.hpp"

namespace pdvoice::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct FmtChunk {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

// One sample frame decoded to [-1, 1]; integer PCM is divided by the signed
// maximum of its bit depth (e.g. 32768 for 16-bit), 8-bit PCM is unsigned.
double decode_sample(const unsigned char* p, std::uint16_t bits,
                     std::uint16_t format_tag) {
  if (format_tag == kFormatFloat) {
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
      return v / 8388608.0;
    }
    case 32: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return v / 2147483648.0;
    }
    default:
      throw DecodeError("unsupported PCM bit depth: " + std::to_string(bits),
                        format_tag);
  }
}

}  // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError(path + ": not a RIFF/WAVE file");

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t chunk_size = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size())
      throw DataError(path + ": truncated chunk at offset " +
                      std::to_string(pos));
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError(path + ": fmt chunk too small");
      fmt.format_tag = read_u16(chunk + 8);
      fmt.channels = read_u16(chunk + 10);
      fmt.sample_rate = read_u32(chunk + 12);
      fmt.bits_per_sample = read_u16(chunk + 22);
      if (fmt.format_tag == kFormatExtensible && chunk_size >= 40) {
        // sub-format GUID starts with the real format tag
        fmt.format_tag = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw DataError(path + ": missing fmt chunk");
  if (!data) throw DataError(path + ": missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0)
    throw DataError(path + ": invalid fmt chunk");

  if (fmt.format_tag != kFormatPcm && fmt.format_tag != kFormatFloat)
    throw DecodeError(path + ": unsupported codec, format tag " +
                          std::to_string(fmt.format_tag),
                      fmt.format_tag);
  if (fmt.format_tag == kFormatFloat && fmt.bits_per_sample != 32)
    throw DecodeError(path + ": only 32-bit float is supported",
                      fmt.format_tag);

  std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
  std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (frame_bytes == 0) throw DataError(path + ": zero block align");
  std::size_t frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.source_path = path;
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const unsigned char* p = data + f * frame_bytes;
    double sum = 0.0;
    for (std::uint16_t c = 0; c < fmt.channels; ++c)
      sum += decode_sample(p + c * bytes_per_sample, fmt.bits_per_sample,
                           fmt.format_tag);
    double v = sum / fmt.channels;
    if (!std::isfinite(v))
      throw DataError(path + ": non-finite sample value in float data");
    clip.samples[f] = std::clamp(v, -1.0, 1.0);
  }
  return clip;
}

void write_wav16(const AudioClip& clip, const std::string& path) {
  if (clip.sample_rate <= 0)
    throw PreconditionError("write_wav16: sample_rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);

  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF)};
    out.write(reinterpret_cast<char*>(b), 2);
  };

  std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(kFormatPcm);
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(2);   // block align
  put_u16(16);  // bits per sample
  out.write("data", 4);
  put_u32(data_bytes);
  for (double s : clip.samples) {
    // quantize on the decoder's scale so a round trip stays within 1/32768
    auto q = static_cast<long>(std::lround(std::clamp(s, -1.0, 1.0) * 32768.0));
    q = std::clamp(q, -32768L, 32767L);
    put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<SegmentSpec> segment_by_silence(const AudioClip& clip,
                                            const SilenceConfig& cfg) {
  if (cfg.min_silence_s <= 0 || cfg.rms_threshold <= 0)
    throw PreconditionError("segment_by_silence: thresholds must be positive");
  const std::size_t n = clip.samples.size();
  if (n == 0) return {};

  const auto frame_len =
      static_cast<std::size_t>(std::lround(cfg.frame_s * clip.sample_rate));
  const auto hop =
      static_cast<std::size_t>(std::lround(cfg.hop_s * clip.sample_rate));
  if (frame_len == 0 || hop == 0)
    throw PreconditionError("segment_by_silence: frame/hop too small");

  // Per-frame RMS; a short clip (< one frame) is treated as a single frame.
  std::size_t num_frames = n >= frame_len ? (n - frame_len) / hop + 1 : 1;
  std::vector<bool> silent(num_frames);
  for (std::size_t i = 0; i < num_frames; ++i) {
    std::size_t begin = i * hop;
    std::size_t end = std::min(begin + frame_len, n);
    double acc = 0.0;
    for (std::size_t s = begin; s < end; ++s)
      acc += clip.samples[s] * clip.samples[s];
    double rms = std::sqrt(acc / static_cast<double>(end - begin));
    silent[i] = rms < cfg.rms_threshold;
  }

  // Silent gaps: maximal runs of silent frames whose covered time span
  // reaches min_silence_s. They become cut regions in sample space.
  struct Gap {
    std::size_t start, end;  // sample range
  };
  std::vector<Gap> gaps;
  std::size_t run_begin = 0;
  bool in_run = false;
  auto flush_run = [&](std::size_t run_end_frame) {
    // frames [run_begin, run_end_frame) are silent
    std::size_t first_sample = run_begin * hop;
    std::size_t last_sample =
        std::min((run_end_frame - 1) * hop + frame_len, n);
    double span_s =
        static_cast<double>(last_sample - first_sample) / clip.sample_rate;
    if (span_s >= cfg.min_silence_s) gaps.push_back({first_sample, last_sample});
  };
  for (std::size_t i = 0; i < num_frames; ++i) {
    if (silent[i] && !in_run) {
      in_run = true;
      run_begin = i;
    } else if (!silent[i] && in_run) {
      in_run = false;
      flush_run(i);
    }
  }
  if (in_run) flush_run(num_frames);

  // Voiced runs are the complement of the gaps; drop runs below min_segment_s.
  std::vector<SegmentSpec> segments;
  std::size_t cursor = 0;
  auto emit = [&](std::size_t begin, std::size_t end) {
    if (end <= begin) return;
    double len_s = static_cast<double>(end - begin) / clip.sample_rate;
    if (len_s >= cfg.min_segment_s) segments.push_back({begin, end});
  };
  for (const Gap& g : gaps) {
    emit(cursor, g.start);
    cursor = g.end;
  }
  emit(cursor, n);
  return segments;
}

AudioClip slice(const AudioClip& clip, const SegmentSpec& seg) {
  if (seg.start_sample >= seg.end_sample || seg.end_sample > clip.samples.size())
    throw PreconditionError("slice: segment out of range");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_path = clip.source_path;
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(seg.start_sample),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(seg.end_sample));
  return out;
}

}  // namespace pdvoice::audio
