#include <benchmark/benchmark.h>

#include "support.hpp"

namespace ut = urbanscore::testing;

namespace {

// Fully cached repeat evaluation on the recorded fixture: scoring, persistence
// and explanation lookup without upstream calls.
void BM_EvaluateCached(benchmark::State& state) {
  auto h = ut::make_harness();
  urbanscore::service::EvaluateRequest req;
  req.address = ut::kAddress;
  h.engine->evaluate(req);
  for (auto _ : state) benchmark::DoNotOptimize(h.engine->evaluate(req));
}
BENCHMARK(BM_EvaluateCached)->Unit(benchmark::kMicrosecond);

// Cold evaluation of distinct points against instant synthetic providers.
void BM_EvaluateCold(benchmark::State& state) {
  ut::HarnessOptions options;
  options.synthetic = true;
  auto h = ut::make_harness(options);
  int i = 0;
  for (auto _ : state) {
    urbanscore::service::EvaluateRequest req;
    req.point = urbanscore::GeoPoint{44.0 + (i % 500) * 0.002, 26.0 + (i / 500) * 0.002};
    ++i;
    benchmark::DoNotOptimize(h.engine->evaluate(req));
  }
}
BENCHMARK(BM_EvaluateCold)->Unit(benchmark::kMicrosecond);

}  // namespace
