#include "pdvoice/perturbation.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "pdvoice/errors.hpp"

namespace pdvoice::perturb {

namespace {

void require_cycles(const char* measure, std::size_t have, std::size_t need) {
  if (have < need) throw InsufficientCyclesError(measure, have, need);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double mean_abs_consecutive_diff(std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    acc += std::abs(v[i] - v[i + 1]);
  return acc / static_cast<double>(v.size() - 1);
}

// mean over interior i of |v_i - mean(v_{i-w}..v_{i+w})|, as a fraction of
// the sequence mean, in percent.
double window_quotient(const char* measure, std::span<const double> v,
                       std::size_t half_width) {
  const std::size_t window = 2 * half_width + 1;
  require_cycles(measure, v.size(), window);
  double mean = mean_of(v);
  if (mean <= 0.0)
    throw PreconditionError(std::string(measure) + ": sequence mean must be positive");
  double acc = 0.0;
  const std::size_t interior = v.size() - 2 * half_width;
  for (std::size_t i = half_width; i < v.size() - half_width; ++i) {
    double local = 0.0;
    for (std::size_t j = i - half_width; j <= i + half_width; ++j) local += v[j];
    acc += std::abs(v[i] - local / static_cast<double>(window));
  }
  return acc / static_cast<double>(interior) / mean * 100.0;
}

}  // namespace

double jitter_absolute(const pitch::PeriodTrack& track) {
  require_cycles("jitter_absolute", track.size(), 2);
  return mean_abs_consecutive_diff(track.periods);
}

double jitter_relative(const pitch::PeriodTrack& track) {
  require_cycles("jitter_relative", track.size(), 2);
  double mean = mean_of(track.periods);
  if (mean <= 0.0)
    throw PreconditionError("jitter_relative: mean period must be positive");
  return mean_abs_consecutive_diff(track.periods) / mean * 100.0;
}

double jitter_rap(const pitch::PeriodTrack& track) {
  return window_quotient("jitter_rap", track.periods, 1);
}

double jitter_ppq5(const pitch::PeriodTrack& track) {
  return window_quotient("jitter_ppq5", track.periods, 2);
}

double shimmer_db(const pitch::PeriodTrack& track) {
  require_cycles("shimmer_db", track.size(), 2);
  const auto& a = track.amplitudes;
  for (double v : a)
    if (v <= 0.0)
      throw InsufficientCyclesError("shimmer_db",
                                    "non-positive cycle amplitude in track");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    acc += std::abs(20.0 * std::log10(a[i + 1] / a[i]));
  return acc / static_cast<double>(a.size() - 1);
}

double shimmer_relative(const pitch::PeriodTrack& track) {
  require_cycles("shimmer_relative", track.size(), 2);
  double mean = mean_of(track.amplitudes);
  if (mean <= 0.0)
    throw PreconditionError("shimmer_relative: mean amplitude must be positive");
  return mean_abs_consecutive_diff(track.amplitudes) / mean * 100.0;
}

double shimmer_apq3(const pitch::PeriodTrack& track) {
  return window_quotient("shimmer_apq3", track.amplitudes, 1);
}

double shimmer_apq5(const pitch::PeriodTrack& track) {
  return window_quotient("shimmer_apq5", track.amplitudes, 2);
}

}  // namespace pdvoice::perturb
