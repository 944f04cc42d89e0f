#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pdvoice/mfcc.hpp"
#include "pdvoice/pitch.hpp"
#include "test_support.hpp"

using namespace pdvoice;

static void BM_FftMagnitude(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> frame(n);
  for (auto& v : frame) v = uni(eng);
  for (auto _ : state)
    benchmark::DoNotOptimize(mfcc::magnitude_spectrum(frame, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FftMagnitude)->Arg(256)->Arg(512)->Arg(1024)->Arg(4096);

static void BM_MfccSegment(benchmark::State& state) {
  auto clip = testsup::make_voice(140.0, 1.0, 16000, 0.01, 0.05, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mfcc::mfcc_features(clip));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(clip.samples.size()));
}
BENCHMARK(BM_MfccSegment);

static void BM_PitchContour(benchmark::State& state) {
  auto clip = testsup::make_voice(120.0, 1.0, 16000, 0.01, 0.05, 4);
  for (auto _ : state) benchmark::DoNotOptimize(pitch::track_f0(clip));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(clip.samples.size()));
}
BENCHMARK(BM_PitchContour);

static void BM_PeriodTrack(benchmark::State& state) {
  auto clip = testsup::make_voice(120.0, 1.0, 16000, 0.02, 0.1, 5);
  auto contour = pitch::track_f0(clip);
  for (auto _ : state)
    benchmark::DoNotOptimize(pitch::extract_period_track(clip, contour));
}
BENCHMARK(BM_PeriodTrack);
