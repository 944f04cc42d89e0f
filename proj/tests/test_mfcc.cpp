#include "pdvoice/mfcc.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "pdvoice/errors.hpp"
#include "test_support.hpp"

using namespace pdvoice;

TEST_CASE("pre_emphasis follows the first-difference filter") {
  auto flat = mfcc::pre_emphasis(std::vector<double>{1.0, 1.0, 1.0});
  CHECK(flat[0] == doctest::Approx(1.0));
  CHECK(flat[1] == doctest::Approx(0.05));
  CHECK(flat[2] == doctest::Approx(0.05));

  auto impulse = mfcc::pre_emphasis(std::vector<double>{1.0, 0.0, 0.0});
  CHECK(impulse[0] == doctest::Approx(1.0));
  CHECK(impulse[1] == doctest::Approx(-0.95));
  CHECK(impulse[2] == doctest::Approx(0.0));

  auto zeros = mfcc::pre_emphasis(std::vector<double>(5, 0.0));
  for (double v : zeros) CHECK(v == 0.0);

  CHECK_THROWS_AS(mfcc::pre_emphasis(std::vector<double>{}), PreconditionError);
}

TEST_CASE("frame_signal counts and offsets") {
  // 100 samples at sr=1000 with 40/20-sample frames
  std::vector<double> signal(100);
  for (std::size_t i = 0; i < signal.size(); ++i)
    signal[i] = static_cast<double>(i);
  auto fm = mfcc::frame_signal(signal, 1000, 0.040, 0.020);
  REQUIRE(fm.count == 4);
  CHECK(fm.frame_len == 40);
  for (std::size_t f = 0; f < 4; ++f)
    CHECK(fm.row(f)[0] == doctest::Approx(static_cast<double>(f * 20)));

  auto exact = mfcc::frame_signal(std::vector<double>(40, 1.0), 1000, 0.040, 0.020);
  CHECK(exact.count == 1);

  auto padded = mfcc::frame_signal(std::vector<double>(30, 1.0), 1000, 0.040, 0.020);
  REQUIRE(padded.count == 1);
  for (std::size_t i = 0; i < 30; ++i) CHECK(padded.row(0)[i] == 1.0);
  for (std::size_t i = 30; i < 40; ++i) CHECK(padded.row(0)[i] == 0.0);
}

TEST_CASE("hamming window endpoints, peak and symmetry") {
  auto w = mfcc::hamming_window(31);
  CHECK(std::fabs(w[0] - 0.08) <= 1e-12);
  CHECK(std::fabs(w[30] - 0.08) <= 1e-12);
  CHECK(w[15] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t n = 0; n < w.size(); ++n)
    CHECK(w[n] == doctest::Approx(w[w.size() - 1 - n]).epsilon(1e-12));
  CHECK_THROWS_AS(mfcc::hamming_window(1), PreconditionError);
}

TEST_CASE("magnitude_spectrum special signals") {
  std::vector<double> ones(8, 1.0);
  auto dc = mfcc::magnitude_spectrum(ones);
  REQUIRE(dc.size() == 5);
  CHECK(dc[0] == doctest::Approx(8.0).epsilon(1e-12));
  for (std::size_t k = 1; k < dc.size(); ++k)
    CHECK(dc[k] == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> impulse(16, 0.0);
  impulse[0] = 1.0;
  auto flat = mfcc::magnitude_spectrum(impulse);
  for (double m : flat) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));

  const std::size_t n = 64, k0 = 5;
  std::vector<double> tone(n);
  for (std::size_t i = 0; i < n; ++i)
    tone[i] = std::cos(2.0 * std::numbers::pi * k0 * i / n);
  auto spec = mfcc::magnitude_spectrum(tone);
  CHECK(spec[k0] == doctest::Approx(n / 2.0).epsilon(1e-9));
  for (std::size_t k = 0; k <= n / 2; ++k)
    if (k != k0) CHECK(std::fabs(spec[k]) < 1e-9);
}

TEST_CASE("fft agrees with the quadratic DFT on random frames") {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (std::size_t n : {16u, 64u, 128u, 512u, 1024u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = uni(eng);
    auto got = mfcc::magnitude_spectrum(x, n);
    auto ref = testsup::dft_naive(x);
    for (std::size_t k = 0; k <= n / 2; ++k)
      CHECK(std::fabs(got[k] - std::abs(ref[k])) < 1e-9);
  }
}

TEST_CASE("mel scale anchors and inversion") {
  CHECK(mfcc::hz_to_mel(0.0) == 0.0);
  double kilohertz = mfcc::hz_to_mel(1000.0);
  CHECK(kilohertz >= 999.5);
  CHECK(kilohertz <= 1000.5);
  CHECK(mfcc::hz_to_mel(700.0) ==
        doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-12));
  for (double f = 0.0; f <= 8000.0; f += 333.0)
    CHECK(mfcc::mel_to_hz(mfcc::hz_to_mel(f)) ==
          doctest::Approx(f).epsilon(1e-9));
  CHECK_THROWS_AS(mfcc::hz_to_mel(-1.0), PreconditionError);
}

TEST_CASE("filterbank peaks at its center bins and vanishes at neighbors") {
  auto fb = mfcc::build_mel_filterbank(26, 512, 16000);
  REQUIRE(fb.num_filters == 26);
  const double bin_hz = 16000.0 / 512.0;
  for (std::size_t m = 0; m < fb.num_filters; ++m) {
    auto center = static_cast<std::size_t>(std::lround(fb.center_hz[m] / bin_hz));
    CHECK(fb.at(m, center) == doctest::Approx(1.0).epsilon(1e-12));
    if (m > 0) {
      auto left = static_cast<std::size_t>(
          std::lround(fb.center_hz[m - 1] / bin_hz));
      CHECK(fb.at(m, left) == doctest::Approx(0.0));
    }
    if (m + 1 < fb.num_filters) {
      auto right = static_cast<std::size_t>(
          std::lround(fb.center_hz[m + 1] / bin_hz));
      CHECK(fb.at(m, right) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("filterbank rows are nonnegative with one maximal region") {
  auto fb = mfcc::build_mel_filterbank(20, 256, 8000, 100.0, 3800.0);
  const double bin_hz = 8000.0 / 256.0;
  for (std::size_t m = 0; m < fb.num_filters; ++m) {
    bool seen_descent = false;
    double prev = -1.0;
    for (std::size_t k = 0; k < fb.num_bins; ++k) {
      double w = fb.at(m, k);
      CHECK(w >= 0.0);
      if (w > prev && prev >= 0.0 && seen_descent && w > 0.0)
        FAIL_CHECK("second rise in filter row");
      if (w < prev) seen_descent = true;
      prev = w;
      double hz = k * bin_hz;
      if (hz < 90.0 || hz > 3900.0) CHECK(w == 0.0);
    }
  }
}

TEST_CASE("filterbank construction fails when centers collide") {
  CHECK_THROWS_AS(mfcc::build_mel_filterbank(40, 64, 16000), PreconditionError);
}

TEST_CASE("log_mel_energies floors silence and matches the loop oracle") {
  auto fb = mfcc::build_mel_filterbank(26, 512, 16000);
  std::vector<double> zeros(fb.num_bins, 0.0);
  for (double v : mfcc::log_mel_energies(zeros, fb))
    CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-12));

  // single-bin spectrum picks out one filter weight
  auto center_bin = static_cast<std::size_t>(
      std::lround(fb.center_hz[7] / (16000.0 / 512.0)));
  std::vector<double> single(fb.num_bins, 0.0);
  single[center_bin] = 1.0;
  auto energies = mfcc::log_mel_energies(single, fb);
  CHECK(energies[7] == doctest::Approx(std::log(1.0)).epsilon(1e-12));

  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> uni(0.0, 3.0);
  std::vector<double> mags(fb.num_bins);
  for (auto& v : mags) v = uni(eng);
  auto got = mfcc::log_mel_energies(mags, fb);
  auto ref = testsup::filterbank_apply_naive(mags, fb);
  for (std::size_t m = 0; m < got.size(); ++m)
    CHECK(testsup::rel_err(got[m], ref[m]) < 1e-12);
}

TEST_CASE("dct_cepstrum basics and loop oracle") {
  std::vector<double> constant(20, 3.25);
  auto c = mfcc::dct_cepstrum(constant, 13);
  CHECK(c[0] == doctest::Approx(20.0 * 3.25).epsilon(1e-12));
  for (std::size_t k = 1; k < c.size(); ++k)
    CHECK(c[k] == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> one = {7.5};
  auto single = mfcc::dct_cepstrum(one, 1);
  CHECK(single[0] == doctest::Approx(7.5));

  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  std::vector<double> v(26);
  for (auto& x : v) x = uni(eng);
  auto got = mfcc::dct_cepstrum(v, 13);
  auto ref = testsup::dct_naive(v, 13);
  for (std::size_t k = 0; k < got.size(); ++k)
    CHECK(testsup::rel_err(got[k], ref[k]) < 1e-12);

  CHECK_THROWS_AS(mfcc::dct_cepstrum(std::vector<double>(5, 1.0), 13),
                  PreconditionError);
}

namespace {

// End-to-end reference: the whole chain re-done with naive loops.
std::vector<double> mfcc_reference(const audio::AudioClip& clip,
                                   const mfcc::MfccConfig& cfg) {
  std::vector<double> emphasized(clip.samples.size());
  emphasized[0] = clip.samples[0];
  for (std::size_t n = 1; n < clip.samples.size(); ++n)
    emphasized[n] =
        clip.samples[n] - cfg.pre_emphasis_alpha * clip.samples[n - 1];

  auto frame_len =
      static_cast<std::size_t>(std::lround(cfg.frame_s * clip.sample_rate));
  auto hop =
      static_cast<std::size_t>(std::lround(cfg.hop_s * clip.sample_rate));
  std::size_t count = emphasized.size() >= frame_len
                          ? (emphasized.size() - frame_len) / hop + 1
                          : 1;
  std::size_t fft_size = 1;
  while (fft_size < frame_len) fft_size <<= 1;

  auto fb = mfcc::build_mel_filterbank(cfg.num_filters, fft_size,
                                       clip.sample_rate, cfg.f_min, cfg.f_max);

  std::vector<double> mean(cfg.num_ceps, 0.0);
  for (std::size_t f = 0; f < count; ++f) {
    std::vector<double> frame(fft_size, 0.0);
    for (std::size_t i = 0; i < frame_len && f * hop + i < emphasized.size(); ++i)
      frame[i] = emphasized[f * hop + i] *
                 (0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i /
                                         (frame_len - 1)));
    auto spectrum = testsup::dft_naive(frame);
    std::vector<double> mags(fft_size / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k)
      mags[k] = std::abs(spectrum[k]);
    auto log_mel = testsup::filterbank_apply_naive(mags, fb);
    auto ceps = testsup::dct_naive(log_mel, cfg.num_ceps);
    for (std::size_t k = 0; k < ceps.size(); ++k) mean[k] += ceps[k];
  }
  for (double& v : mean) v /= static_cast<double>(count);
  return mean;
}

}  // namespace

TEST_CASE("440 Hz sine matches the brute-force reference pipeline") {
  auto clip = testsup::make_sine(440.0, 0.3, 16000);
  mfcc::MfccConfig cfg;
  auto got = mfcc::mfcc_features(clip, cfg);
  auto ref = mfcc_reference(clip, cfg);
  REQUIRE(got.size() == 13);
  for (std::size_t k = 0; k < 13; ++k) CHECK(std::fabs(got[k] - ref[k]) < 1e-9);
}

TEST_CASE("single-frame segment equals its own coefficients") {
  mfcc::MfccConfig cfg;
  auto clip = testsup::make_sine(300.0, cfg.frame_s, 16000);
  clip.samples.resize(
      static_cast<std::size_t>(std::lround(cfg.frame_s * 16000)));
  auto matrix = mfcc::mfcc_frame_matrix(clip, cfg);
  REQUIRE(matrix.size() == 1);
  auto features = mfcc::mfcc_features(clip, cfg);
  for (std::size_t k = 0; k < 13; ++k)
    CHECK(features[k] == doctest::Approx(matrix[0][k]).epsilon(1e-12));
}

TEST_CASE("two identical frames average to either frame") {
  // block ends at zero so pre-emphasis does not couple across the boundary
  mfcc::MfccConfig cfg;
  cfg.frame_s = 0.032;
  cfg.hop_s = 0.032;  // non-overlapping
  const int sr = 16000;
  auto block = testsup::make_sine(250.0, 0.032, sr);  // 512 samples: full cycles
  block.samples.back() = 0.0;
  audio::AudioClip two;
  two.sample_rate = sr;
  two.samples = block.samples;
  two.samples.insert(two.samples.end(), block.samples.begin(),
                     block.samples.end());

  auto matrix = mfcc::mfcc_frame_matrix(two, cfg);
  REQUIRE(matrix.size() == 2);
  auto features = mfcc::mfcc_features(two, cfg);
  for (std::size_t k = 0; k < 13; ++k) {
    CHECK(matrix[0][k] == doctest::Approx(matrix[1][k]).epsilon(1e-9));
    CHECK(features[k] == doctest::Approx(matrix[0][k]).epsilon(1e-9));
  }
}

TEST_CASE("mean MFCCs barely move when a stationary sine shifts by one hop") {
  mfcc::MfccConfig cfg;
  const int sr = 16000;
  auto clip = testsup::make_sine(200.0, 2.0, sr);
  auto shifted = clip;
  auto hop = static_cast<std::size_t>(std::lround(cfg.hop_s * sr));
  shifted.samples.erase(shifted.samples.begin(),
                        shifted.samples.begin() + static_cast<std::ptrdiff_t>(hop));

  auto a = mfcc::mfcc_features(clip, cfg);
  auto b = mfcc::mfcc_features(shifted, cfg);
  double norm_a = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < 13; ++k) {
    norm_a += a[k] * a[k];
    diff += (a[k] - b[k]) * (a[k] - b[k]);
  }
  CHECK(std::sqrt(diff) / std::sqrt(norm_a) < 0.01);
}

TEST_CASE("frame matrix CSV dump has one row per frame") {
  auto clip = testsup::make_sine(220.0, 0.2, 16000);
  auto matrix = mfcc::mfcc_frame_matrix(clip);
  auto text = mfcc::frame_matrix_to_csv(matrix);
  CHECK(text.rfind("mfcc_0,mfcc_1,", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == matrix.size() + 1);
}

TEST_CASE("mfcc_features is deterministic") {
  auto clip = testsup::make_voice(180.0, 0.8, 16000, 0.02, 0.05, 99);
  auto a = mfcc::mfcc_features(clip);
  auto b = mfcc::mfcc_features(clip);
  for (std::size_t k = 0; k < 13; ++k) CHECK(a[k] == b[k]);
}
