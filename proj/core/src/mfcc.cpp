#include "pdvoice/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pdvoice/errors.hpp"

namespace pdvoice::mfcc {

namespace {
constexpr double kLogFloor = 1e-10;
}

std::vector<double> pre_emphasis(std::span<const double> signal, double alpha) {
  if (signal.empty()) throw PreconditionError("pre_emphasis: empty signal");
  if (alpha < 0.0 || alpha >= 1.0)
    throw PreconditionError("pre_emphasis: alpha must be in [0, 1)");
  std::vector<double> out(signal.size());
  out[0] = signal[0];
  for (std::size_t n = 1; n < signal.size(); ++n)
    out[n] = signal[n] - alpha * signal[n - 1];
  return out;
}

FrameMatrix frame_signal(std::span<const double> signal, int sample_rate,
                         double frame_s, double hop_s) {
  if (sample_rate <= 0)
    throw PreconditionError("frame_signal: sample_rate must be positive");
  if (hop_s <= 0 || frame_s < hop_s)
    throw PreconditionError("frame_signal: need frame_s >= hop_s > 0");

  FrameMatrix fm;
  fm.frame_len = static_cast<std::size_t>(std::lround(frame_s * sample_rate));
  fm.hop = static_cast<std::size_t>(std::lround(hop_s * sample_rate));
  if (fm.frame_len == 0 || fm.hop == 0)
    throw PreconditionError("frame_signal: frame shorter than one sample");

  const std::size_t n = signal.size();
  fm.count = n >= fm.frame_len ? (n - fm.frame_len) / fm.hop + 1 : 1;
  fm.data.assign(fm.count * fm.frame_len, 0.0);
  for (std::size_t f = 0; f < fm.count; ++f) {
    std::size_t begin = f * fm.hop;
    std::size_t len = std::min(fm.frame_len, n - begin);
    std::copy_n(signal.data() + begin, len, fm.data.data() + f * fm.frame_len);
  }
  return fm;
}

std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) throw PreconditionError("hamming_window: N must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / denom);
  return w;
}

void apply_window(std::span<double> frame, std::span<const double> weights) {
  if (frame.size() != weights.size())
    throw PreconditionError("apply_window: size mismatch");
  for (std::size_t i = 0; i < frame.size(); ++i) frame[i] *= weights[i];
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_radix2(std::vector<std::complex<double>>& buf) {
  const std::size_t n = buf.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw PreconditionError("fft_radix2: size must be a power of two");
  if (n == 1) return;

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = buf[i + k];
        std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(std::span<const double> frame,
                                       std::size_t fft_size) {
  if (frame.empty()) throw PreconditionError("magnitude_spectrum: empty frame");
  if (fft_size == 0) fft_size = next_pow2(frame.size());
  if (fft_size < frame.size() || (fft_size & (fft_size - 1)) != 0)
    throw PreconditionError(
        "magnitude_spectrum: fft_size must be a power of two >= frame length");

  std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = {frame[i], 0.0};
  fft_radix2(buf);

  std::vector<double> mags(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buf[k]);
  return mags;
}

double hz_to_mel(double hz) {
  if (hz < 0.0) throw PreconditionError("hz_to_mel: negative frequency");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (mel < 0.0) throw PreconditionError("mel_to_hz: negative mel");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_mel_filterbank(std::size_t num_filters,
                                   std::size_t fft_size, int sample_rate,
                                   double f_min, double f_max) {
  if (num_filters < 2)
    throw PreconditionError("build_mel_filterbank: need at least 2 filters");
  if (sample_rate <= 0)
    throw PreconditionError("build_mel_filterbank: bad sample rate");
  if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0)
    throw PreconditionError("build_mel_filterbank: fft_size must be a power of two");
  const double nyquist = sample_rate / 2.0;
  if (f_max == 0.0) f_max = nyquist;
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= nyquist))
    throw PreconditionError("build_mel_filterbank: need 0 <= f_min < f_max <= Nyquist");

  const std::size_t num_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;

  // L + 2 equally spaced points on the mel axis, snapped to FFT bins so a
  // filter's response is exactly 1 at its center bin and 0 at its neighbors'.
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  const std::size_t num_points = num_filters + 2;
  std::vector<std::size_t> point_bin(num_points);
  for (std::size_t p = 0; p < num_points; ++p) {
    double mel = mel_lo + (mel_hi - mel_lo) * p / (num_points - 1);
    double hz = mel_to_hz(mel);
    point_bin[p] = static_cast<std::size_t>(std::lround(hz / bin_hz));
    if (point_bin[p] >= num_bins) point_bin[p] = num_bins - 1;
  }
  for (std::size_t p = 1; p + 1 < num_points; ++p) {
    if (point_bin[p] == point_bin[p - 1] || point_bin[p] == point_bin[p + 1])
      throw PreconditionError(
          "build_mel_filterbank: " + std::to_string(num_filters) +
          " filters exceed the bin resolution of fft_size " +
          std::to_string(fft_size));
  }

  MelFilterbank fb;
  fb.num_filters = num_filters;
  fb.num_bins = num_bins;
  fb.f_min = f_min;
  fb.f_max = f_max;
  fb.weights.assign(num_filters * num_bins, 0.0);
  fb.center_hz.resize(num_filters);
  for (std::size_t m = 0; m < num_filters; ++m) {
    const std::size_t left = point_bin[m];
    const std::size_t center = point_bin[m + 1];
    const std::size_t right = point_bin[m + 2];
    fb.center_hz[m] = center * bin_hz;
    for (std::size_t k = left; k <= center; ++k)
      fb.weights[m * num_bins + k] =
          static_cast<double>(k - left) / static_cast<double>(center - left);
    for (std::size_t k = center; k <= right; ++k)
      fb.weights[m * num_bins + k] =
          static_cast<double>(right - k) / static_cast<double>(right - center);
  }
  return fb;
}

std::vector<double> log_mel_energies(std::span<const double> magnitudes,
                                     const MelFilterbank& fb) {
  if (magnitudes.size() != fb.num_bins)
    throw PreconditionError("log_mel_energies: spectrum/filterbank bin mismatch");
  std::vector<double> out(fb.num_filters);
  for (std::size_t m = 0; m < fb.num_filters; ++m) {
    double s = 0.0;
    const double* row = fb.weights.data() + m * fb.num_bins;
    for (std::size_t k = 0; k < fb.num_bins; ++k) s += magnitudes[k] * row[k];
    out[m] = std::log(std::max(s * s, kLogFloor));
  }
  return out;
}

std::vector<double> dct_cepstrum(std::span<const double> log_mel,
                                 std::size_t num_ceps) {
  const std::size_t m_count = log_mel.size();
  if (m_count < num_ceps)
    throw PreconditionError("dct_cepstrum: need at least num_ceps filter outputs");
  std::vector<double> ceps(num_ceps, 0.0);
  for (std::size_t k = 0; k < num_ceps; ++k) {
    double acc = 0.0;
    for (std::size_t m = 1; m <= m_count; ++m)
      acc += log_mel[m - 1] *
             std::cos(k * (m - 0.5) * std::numbers::pi / m_count);
    ceps[k] = acc;
  }
  return ceps;
}

std::vector<std::vector<double>> mfcc_frame_matrix(const audio::AudioClip& clip,
                                                   const MfccConfig& cfg) {
  if (clip.samples.empty())
    throw PreconditionError("mfcc_frame_matrix: empty clip");
  auto emphasized = pre_emphasis(clip.samples, cfg.pre_emphasis_alpha);
  FrameMatrix frames =
      frame_signal(emphasized, clip.sample_rate, cfg.frame_s, cfg.hop_s);
  const std::size_t fft_size =
      cfg.fft_size ? cfg.fft_size : next_pow2(frames.frame_len);
  const auto window = hamming_window(frames.frame_len);
  const auto fb = build_mel_filterbank(cfg.num_filters, fft_size,
                                       clip.sample_rate, cfg.f_min, cfg.f_max);

  std::vector<std::vector<double>> coeffs(frames.count);
  std::vector<double> frame(frames.frame_len);
  for (std::size_t f = 0; f < frames.count; ++f) {
    auto row = frames.row(f);
    std::copy(row.begin(), row.end(), frame.begin());
    apply_window(frame, window);
    auto mags = magnitude_spectrum(frame, fft_size);
    auto log_mel = log_mel_energies(mags, fb);
    coeffs[f] = dct_cepstrum(log_mel, cfg.num_ceps);
  }
  return coeffs;
}

std::vector<double> mfcc_features(const audio::AudioClip& clip,
                                  const MfccConfig& cfg) {
  auto matrix = mfcc_frame_matrix(clip, cfg);
  std::vector<double> mean(cfg.num_ceps, 0.0);
  for (const auto& row : matrix)
    for (std::size_t k = 0; k < cfg.num_ceps; ++k) mean[k] += row[k];
  for (double& v : mean) v /= static_cast<double>(matrix.size());
  return mean;
}

std::string frame_matrix_to_csv(
    const std::vector<std::vector<double>>& matrix) {
  std::ostringstream out;
  if (matrix.empty()) return "";
  for (std::size_t k = 0; k < matrix.front().size(); ++k) {
    if (k) out << ',';
    out << "mfcc_" << k;
  }
  out << '\n';
  out.setf(std::ios::fmtflags(0), std::ios::floatfield);
  out.precision(17);
  for (const auto& row : matrix) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << row[k];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pdvoice::mfcc
