#include "pdvoice/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pdvoice/errors.hpp"

namespace pdvoice::pitch {

namespace {

// Normalized cross-correlation of a zero-mean frame with itself at one lag:
// r(tau) = sum x[n] x[n+tau] / sqrt(sum_head x^2 * sum_tail x^2).
// Bounded in [-1, 1] and free of the linear taper a biased estimate has.
double ncc_at_lag(std::span<const double> x, std::size_t lag) {
  const std::size_t n = x.size();
  if (lag >= n) return 0.0;
  double cross = 0.0, head = 0.0, tail = 0.0;
  const std::size_t m = n - lag;
  for (std::size_t i = 0; i < m; ++i) {
    cross += x[i] * x[i + lag];
    head += x[i] * x[i];
    tail += x[i + lag] * x[i + lag];
  }
  double denom = std::sqrt(head * tail);
  if (denom <= 1e-300) return 0.0;
  return cross / denom;
}

std::vector<double> remove_mean(std::span<const double> frame) {
  double mean =
      std::accumulate(frame.begin(), frame.end(), 0.0) / frame.size();
  std::vector<double> x(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) x[i] = frame[i] - mean;
  return x;
}

// Vertex of the parabola through (-1, ym), (0, y0), (+1, yp).
struct Parabola {
  double offset;  // in [-0.5, 0.5]
  double value;
};

Parabola refine_peak(double ym, double y0, double yp) {
  double denom = ym - 2.0 * y0 + yp;
  if (std::abs(denom) < 1e-30) return {0.0, y0};
  double d = 0.5 * (ym - yp) / denom;
  d = std::clamp(d, -0.5, 0.5);
  return {d, y0 - 0.25 * (ym - yp) * d};
}

}  // namespace

std::size_t F0Contour::voiced_count() const {
  std::size_t c = 0;
  for (const auto& v : f0_hz)
    if (v) ++c;
  return c;
}

std::vector<double> F0Contour::voiced_values() const {
  std::vector<double> out;
  out.reserve(f0_hz.size());
  for (const auto& v : f0_hz)
    if (v) out.push_back(*v);
  return out;
}

std::optional<double> estimate_f0_frame(std::span<const double> frame,
                                        int sample_rate,
                                        const PitchConfig& cfg) {
  if (sample_rate <= 0)
    throw PreconditionError("estimate_f0_frame: bad sample rate");
  const double min_len = 2.0 * sample_rate / cfg.f_min;
  if (static_cast<double>(frame.size()) < min_len)
    throw PreconditionError(
        "estimate_f0_frame: frame must span at least two periods of f_min (" +
        std::to_string(static_cast<std::size_t>(std::ceil(min_len))) +
        " samples)");

  const auto x = remove_mean(frame);
  double energy = 0.0;
  for (double v : x) energy += v * v;
  // constant frames leave only rounding residue after mean removal; NCC of
  // that residue is spuriously 1, so gate on energy first
  if (energy / static_cast<double>(x.size()) < 1e-16) return std::nullopt;

  auto lag_min = static_cast<std::size_t>(
      std::max(2.0, std::floor(sample_rate / cfg.f_max)));
  auto lag_max =
      static_cast<std::size_t>(std::ceil(sample_rate / cfg.f_min));
  lag_max = std::min(lag_max, frame.size() - 2);
  if (lag_min >= lag_max) throw PreconditionError("estimate_f0_frame: empty lag range");

  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t lag = lag_min - 1; lag <= lag_max + 1; ++lag)
    r[lag] = ncc_at_lag(x, lag);

  double r_max = r[lag_min];
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag)
    r_max = std::max(r_max, r[lag]);
  if (r_max < cfg.voicing_threshold) return std::nullopt;

  // a multiple of the true period correlates as well as the period itself;
  // take the smallest near-maximal local peak to stay on the fundamental
  constexpr double kOctaveTolerance = 0.01;
  std::size_t best = 0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    if (r[lag] >= r_max - kOctaveTolerance && r[lag] >= r[lag - 1] &&
        r[lag] >= r[lag + 1]) {
      best = lag;
      break;
    }
  }
  if (best == 0) return std::nullopt;

  Parabola peak = refine_peak(r[best - 1], r[best], r[best + 1]);
  if (peak.value < cfg.voicing_threshold) return std::nullopt;

  double lag_refined = static_cast<double>(best) + peak.offset;
  double f0 = sample_rate / lag_refined;
  return std::clamp(f0, cfg.f_min, cfg.f_max);
}

F0Contour track_f0(const audio::AudioClip& clip, const PitchConfig& cfg) {
  const auto frame_len = static_cast<std::size_t>(
      std::lround(cfg.frame_s() * clip.sample_rate));
  const auto hop =
      static_cast<std::size_t>(std::lround(cfg.hop_s * clip.sample_rate));
  F0Contour contour;
  contour.frame_hop_s = static_cast<double>(hop) / clip.sample_rate;
  contour.frame_len_s = static_cast<double>(frame_len) / clip.sample_rate;
  if (frame_len == 0 || hop == 0 || clip.samples.size() < frame_len)
    return contour;

  const std::size_t count = (clip.samples.size() - frame_len) / hop + 1;
  contour.f0_hz.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const double> frame(clip.samples.data() + i * hop, frame_len);
    contour.f0_hz[i] = estimate_f0_frame(frame, clip.sample_rate, cfg);
  }
  return contour;
}

PeriodTrack extract_period_track(const audio::AudioClip& clip,
                                 const F0Contour& contour,
                                 const PitchConfig& cfg) {
  PeriodTrack track;
  const std::size_t n = clip.samples.size();
  if (n == 0 || contour.f0_hz.empty()) return track;
  const auto& x = clip.samples;
  const double sr = clip.sample_rate;
  const auto hop =
      static_cast<std::size_t>(std::lround(contour.frame_hop_s * sr));
  const auto frame_len =
      static_cast<std::size_t>(std::lround(contour.frame_len_s * sr));
  if (hop == 0 || frame_len == 0)
    throw PreconditionError(
        "extract_period_track: contour carries no frame timing");

  // F0 of the frame whose span is closest to a sample position, clamped to
  // the voiced run we are walking.
  auto f0_near = [&](double sample_pos, std::size_t run_begin,
                     std::size_t run_end) {
    double centered = sample_pos - static_cast<double>(frame_len) / 2.0;
    auto idx = static_cast<std::ptrdiff_t>(std::lround(centered / hop));
    idx = std::clamp(idx, static_cast<std::ptrdiff_t>(run_begin),
                     static_cast<std::ptrdiff_t>(run_end));
    return *contour.f0_hz[static_cast<std::size_t>(idx)];
  };

  // Peak position refined to sub-sample accuracy; keeps period jitter of a
  // quantized sine well below the tracker's stability floor.
  auto refined_peak = [&](std::size_t p) {
    if (p == 0 || p + 1 >= n)
      return std::pair<double, double>{static_cast<double>(p), x[p]};
    Parabola v = refine_peak(x[p - 1], x[p], x[p + 1]);
    return std::pair<double, double>{static_cast<double>(p) + v.offset,
                                     v.value};
  };

  const double t_lo = 1.0 / cfg.f_max;
  const double t_hi = 1.0 / cfg.f_min;

  std::size_t i = 0;
  while (i < contour.f0_hz.size()) {
    if (!contour.f0_hz[i]) {
      ++i;
      continue;
    }
    std::size_t run_begin = i;
    while (i < contour.f0_hz.size() && contour.f0_hz[i]) ++i;
    std::size_t run_end = i - 1;  // inclusive frame index

    std::size_t sample_begin = run_begin * hop;
    std::size_t sample_end = std::min(run_end * hop + frame_len, n);

    // First mark: strongest peak within one period of the run start.
    double t0 = sr / f0_near(static_cast<double>(sample_begin), run_begin, run_end);
    std::size_t w_end = std::min(
        sample_begin + static_cast<std::size_t>(std::lround(t0)) + 1, sample_end);
    if (w_end <= sample_begin + 1) continue;
    std::size_t p = sample_begin;
    for (std::size_t s = sample_begin; s < w_end; ++s)
      if (x[s] > x[p]) p = s;

    std::vector<double> marks, peak_amps;
    auto [pos, amp] = refined_peak(p);
    marks.push_back(pos);
    peak_amps.push_back(std::abs(amp));

    while (true) {
      double period = sr / f0_near(marks.back(), run_begin, run_end);
      auto lo = static_cast<std::size_t>(std::lround(marks.back() + 0.8 * period));
      auto hi = static_cast<std::size_t>(std::lround(marks.back() + 1.25 * period));
      hi = std::min(hi, sample_end > 0 ? sample_end - 1 : 0);
      if (lo >= hi) break;
      std::size_t q = lo;
      for (std::size_t s = lo; s <= hi; ++s)
        if (x[s] > x[q]) q = s;
      auto [qpos, qamp] = refined_peak(q);
      if (qpos <= marks.back()) break;
      marks.push_back(qpos);
      peak_amps.push_back(std::abs(qamp));
    }

    for (std::size_t m = 0; m + 1 < marks.size(); ++m) {
      double period_s = (marks[m + 1] - marks[m]) / sr;
      if (period_s < t_lo || period_s > t_hi) continue;
      track.periods.push_back(period_s);
      track.amplitudes.push_back(peak_amps[m]);
    }
  }
  return track;
}

HnrValue hnr_from_autocorrelation(double r, double floor_db) {
  if (r <= 0.0) return {floor_db, true};
  r = std::min(r, 1.0 - 1e-15);
  return {10.0 * std::log10(r / (1.0 - r)), false};
}

HnrValue compute_hnr(std::span<const double> frame, int sample_rate,
                     double f0_hz, const PitchConfig& cfg) {
  if (f0_hz < cfg.f_min || f0_hz > cfg.f_max)
    throw PreconditionError("compute_hnr: f0 outside the configured pitch range");
  const auto lag = static_cast<std::size_t>(std::lround(sample_rate / f0_hz));
  if (frame.size() < lag + 2)
    throw PreconditionError("compute_hnr: frame shorter than one pitch period");

  const auto x = remove_mean(frame);
  return hnr_from_autocorrelation(ncc_at_lag(x, lag), cfg.hnr_floor_db);
}

double mean_hnr(const audio::AudioClip& clip, const F0Contour& contour,
                const PitchConfig& cfg) {
  const auto hop =
      static_cast<std::size_t>(std::lround(contour.frame_hop_s * clip.sample_rate));
  const auto frame_len =
      static_cast<std::size_t>(std::lround(contour.frame_len_s * clip.sample_rate));
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < contour.f0_hz.size(); ++i) {
    if (!contour.f0_hz[i]) continue;
    std::span<const double> frame(clip.samples.data() + i * hop, frame_len);
    acc += compute_hnr(frame, clip.sample_rate, *contour.f0_hz[i], cfg).db;
    ++count;
  }
  if (count == 0)
    throw FeatureExtractionError("mean_hnr: no voiced frames in contour");
  return acc / static_cast<double>(count);
}

PitchFeatures f0_and_pitch_features(const F0Contour& contour) {
  auto voiced = contour.voiced_values();
  if (voiced.empty())
    throw FeatureExtractionError(
        "f0_and_pitch_features: no voiced frames in contour");
  double mean = std::accumulate(voiced.begin(), voiced.end(), 0.0) /
                static_cast<double>(voiced.size());
  std::sort(voiced.begin(), voiced.end());
  std::size_t m = voiced.size() / 2;
  double median = voiced.size() % 2 ? voiced[m]
                                    : 0.5 * (voiced[m - 1] + voiced[m]);
  return {mean, median};
}

std::string contour_to_csv(const F0Contour& contour) {
  std::ostringstream out;
  out << "frame_index,f0_hz\n";
  for (std::size_t i = 0; i < contour.f0_hz.size(); ++i) {
    out << i << ',';
    if (contour.f0_hz[i]) out << *contour.f0_hz[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace pdvoice::pitch
