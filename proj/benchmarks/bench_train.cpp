#include <benchmark/benchmark.h>

#include "pdvoice/classifiers.hpp"
#include "test_support.hpp"

using namespace pdvoice;

namespace {

void blob_data(std::size_t n_per_class, ml::Rows* x, ml::Labels* y) {
  testsup::make_blobs(n_per_class, 24, 3.0, 42, x, y);
}

void bench_family(benchmark::State& state, ml::ModelFamily family) {
  ml::Rows x;
  ml::Labels y;
  blob_data(static_cast<std::size_t>(state.range(0)), &x, &y);
  auto spec = ml::default_spec(family, 7);
  for (auto _ : state) {
    auto model = ml::fit_model(spec, x, y);
    benchmark::DoNotOptimize(model);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(x.size()));
}

}  // namespace

static void BM_FitSvmRbf(benchmark::State& state) {
  bench_family(state, ml::ModelFamily::kSvm);
}
BENCHMARK(BM_FitSvmRbf)->Arg(100)->Arg(250);

static void BM_FitCart(benchmark::State& state) {
  bench_family(state, ml::ModelFamily::kDecisionTree);
}
BENCHMARK(BM_FitCart)->Arg(100)->Arg(250);

static void BM_FitRandomForest(benchmark::State& state) {
  bench_family(state, ml::ModelFamily::kRandomForest);
}
BENCHMARK(BM_FitRandomForest)->Arg(100);

static void BM_FitGradientBoosting(benchmark::State& state) {
  bench_family(state, ml::ModelFamily::kGradientBoosting);
}
BENCHMARK(BM_FitGradientBoosting)->Arg(100);

static void BM_FitLogisticRegression(benchmark::State& state) {
  bench_family(state, ml::ModelFamily::kLogisticRegression);
}
BENCHMARK(BM_FitLogisticRegression)->Arg(100)->Arg(250);
