#pragma once

// WAV decoding, mono normalization and silence-gap segmentation.

#include <cstddef>
#include <string>
#include <vector>

namespace pdvoice::audio {

// Mono sample buffer, amplitudes in [-1, 1]. Immutable once loaded.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_path;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Half-open sample range [start, end) inside one clip.
struct SegmentSpec {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;

  std::size_t length() const { return end_sample - start_sample; }
  bool operator==(const SegmentSpec&) const = default;
};

// Decodes a RIFF/WAVE file. Supported encodings: PCM 8/16/24/32-bit integer
// and 32-bit IEEE float. Integer samples are scaled by the signed maximum of
// the bit depth; multi-channel input is averaged to mono.
AudioClip load_wav(const std::string& path);

// Writes a mono 16-bit PCM WAV file.
void write_wav16(const AudioClip& clip, const std::string& path);

struct SilenceConfig {
  double rms_threshold = 0.01;  // of full scale
  double min_silence_s = 0.5;   // gap length that marks a cut point
  double min_segment_s = 0.5;   // runs shorter than this are dropped
  double frame_s = 0.025;
  double hop_s = 0.010;
};

// Splits a clip at silent gaps: a gap is a run of frames whose RMS stays
// below rms_threshold for at least min_silence_s. Returned segments are
// ordered, disjoint, and each at least min_segment_s long. An empty clip
// yields an empty list.
std::vector<SegmentSpec> segment_by_silence(const AudioClip& clip,
                                            const SilenceConfig& cfg = {});

// Copies one segment out of a clip.
AudioClip slice(const AudioClip& clip, const SegmentSpec& seg);

}  // namespace pdvoice::audio
