#pragma once

// Autocorrelation F0 tracking, cycle marking (PeriodTrack) and HNR.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdvoice/audio.hpp"

namespace pdvoice::pitch {

struct PitchConfig {
  double f_min = 75.0;
  double f_max = 500.0;
  double voicing_threshold = 0.45;  // on the normalized autocorrelation peak
  double hop_s = 0.010;
  double frame_periods = 3.0;  // analysis frame length in periods of f_min
  double hnr_floor_db = -20.0;

  double frame_s() const { return frame_periods / f_min; }
};

// Per-frame F0 values; nullopt marks an unvoiced frame.
struct F0Contour {
  std::vector<std::optional<double>> f0_hz;
  double frame_hop_s = 0.0;
  double frame_len_s = 0.0;

  std::size_t voiced_count() const;
  std::vector<double> voiced_values() const;
};

// Cycle-level track: periods T_i (seconds) and peak amplitudes A_i, equal
// length. Empty when no voiced cycles were found.
struct PeriodTrack {
  std::vector<double> periods;
  std::vector<double> amplitudes;

  std::size_t size() const { return periods.size(); }
  bool empty() const { return periods.empty(); }
};

// Normalized-autocorrelation estimate for one frame with parabolic lag
// interpolation. Returns nullopt when the peak falls below the voicing
// threshold. The frame must span at least two periods of f_min.
std::optional<double> estimate_f0_frame(std::span<const double> frame,
                                        int sample_rate,
                                        const PitchConfig& cfg = {});

// Frame-by-frame F0 over a clip (frame cfg.frame_s(), hop cfg.hop_s).
F0Contour track_f0(const audio::AudioClip& clip, const PitchConfig& cfg = {});

// Places cycle marks at successive waveform peaks about 1/F0 apart inside the
// voiced regions of the contour, with sub-sample parabolic peak refinement.
// An all-unvoiced contour produces an empty track.
PeriodTrack extract_period_track(const audio::AudioClip& clip,
                                 const F0Contour& contour,
                                 const PitchConfig& cfg = {});

struct HnrValue {
  double db = 0.0;
  bool degenerate = false;  // autocorrelation was <= 0, value is the floor
};

// 10 log10(r / (1 - r)); r <= 0 returns the floor with the degenerate flag,
// r >= 1 is clamped just below 1.
HnrValue hnr_from_autocorrelation(double r, double floor_db = -20.0);

// r = normalized autocorrelation at the f0 lag; returns 10 log10(r / (1 - r)).
HnrValue compute_hnr(std::span<const double> frame, int sample_rate,
                     double f0_hz, const PitchConfig& cfg = {});

// Mean per-frame HNR over the voiced frames of a contour; the per-signal
// feature value.
double mean_hnr(const audio::AudioClip& clip, const F0Contour& contour,
                const PitchConfig& cfg = {});

struct PitchFeatures {
  double fundamental_frequency_hz = 0.0;  // mean of voiced F0 values
  double pitch_hz = 0.0;                  // median of voiced F0 values
};

// Throws FeatureExtractionError when the contour has no voiced frame.
PitchFeatures f0_and_pitch_features(const F0Contour& contour);

// Debug dump: one line per frame, "frame_index,f0_hz" with an empty second
// field for unvoiced frames.
std::string contour_to_csv(const F0Contour& contour);

}  // namespace pdvoice::pitch
