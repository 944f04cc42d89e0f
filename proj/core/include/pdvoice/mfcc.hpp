#pragma once

// MFCC chain: pre-emphasis -> framing -> Hamming window -> FFT magnitude ->
// triangular mel filterbank -> log energies -> DCT -> 13 coefficients,
// averaged over frames for a per-segment vector.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pdvoice/audio.hpp"

namespace pdvoice::mfcc {

// y[0] = x[0]; y[n] = x[n] - alpha * x[n-1].
std::vector<double> pre_emphasis(std::span<const double> signal,
                                 double alpha = 0.95);

struct FrameMatrix {
  std::vector<double> data;  // row-major, count x frame_len
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  std::size_t count = 0;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * frame_len, frame_len};
  }
  std::span<double> row(std::size_t i) {
    return {data.data() + i * frame_len, frame_len};
  }
};

// Frame count = floor((L - frame_len)/hop) + 1; trailing partial samples are
// dropped. A signal shorter than one frame becomes a single zero-padded frame.
FrameMatrix frame_signal(std::span<const double> signal, int sample_rate,
                         double frame_s = 0.032, double hop_s = 0.016);

// w[n] = 0.54 - 0.46 cos(2 pi n / (N - 1)), N >= 2.
std::vector<double> hamming_window(std::size_t n);

void apply_window(std::span<double> frame, std::span<const double> weights);

// In-place radix-2 FFT; size must be a power of two. Exposed so the tests can
// pit it against a direct DFT.
void fft_radix2(std::vector<std::complex<double>>& buf);

std::size_t next_pow2(std::size_t n);

// |X_k| for k = 0..fft_size/2. fft_size = 0 picks the next power of two at
// or above the frame length; the frame is zero-padded to fft_size.
std::vector<double> magnitude_spectrum(std::span<const double> frame,
                                       std::size_t fft_size = 0);

// f_mel = 2595 log10(1 + f/700) and its inverse.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  std::size_t num_filters = 0;
  std::size_t num_bins = 0;           // fft_size/2 + 1
  std::vector<double> weights;        // row-major, num_filters x num_bins
  std::vector<double> center_hz;      // per filter
  double f_min = 0.0;
  double f_max = 0.0;

  double at(std::size_t filter, std::size_t bin) const {
    return weights[filter * num_bins + bin];
  }
  std::span<const double> row(std::size_t filter) const {
    return {weights.data() + filter * num_bins, num_bins};
  }
};

// L + 2 equally spaced mel points between f_min and f_max, snapped to FFT
// bins; filter m rises linearly to 1 at its center bin and falls to 0 at the
// neighboring centers. Throws if two centers land on the same bin.
MelFilterbank build_mel_filterbank(std::size_t num_filters,
                                   std::size_t fft_size, int sample_rate,
                                   double f_min = 0.0, double f_max = 0.0);

// S_m = sum_k |X_k| M_m(k); returns log(max(S_m^2, 1e-10)) per filter.
std::vector<double> log_mel_energies(std::span<const double> magnitudes,
                                     const MelFilterbank& fb);

// y(k) = sum_{m=1..M} v_m cos(k (m - 0.5) pi / M) for k = 0..num_ceps-1.
std::vector<double> dct_cepstrum(std::span<const double> log_mel,
                                 std::size_t num_ceps = 13);

struct MfccConfig {
  double frame_s = 0.032;
  double hop_s = 0.016;
  double pre_emphasis_alpha = 0.95;
  std::size_t num_filters = 26;
  std::size_t num_ceps = 13;
  std::size_t fft_size = 0;  // 0 = next power of two >= frame length
  double f_min = 0.0;
  double f_max = 0.0;  // 0 = Nyquist
};

// Per-frame coefficient matrix (count x num_ceps) for a segment.
std::vector<std::vector<double>> mfcc_frame_matrix(const audio::AudioClip& clip,
                                                   const MfccConfig& cfg = {});

// Debug dump of the frame matrix: header mfcc_0..mfcc_{n-1}, one row per
// frame.
std::string frame_matrix_to_csv(const std::vector<std::vector<double>>& matrix);

// Column-wise mean of the frame matrix: the 13-value per-segment block.
std::vector<double> mfcc_features(const audio::AudioClip& clip,
                                  const MfccConfig& cfg = {});

}  // namespace pdvoice::mfcc
