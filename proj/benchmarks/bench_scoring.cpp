#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "urbanscore/scoring/scoring.hpp"

using namespace urbanscore::scoring;

namespace {

void BM_Aggregate(benchmark::State& state) {
  const SubScores s{94.3, 75, 91.7, 73.2, 85, 87.9};
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(s, kDefaultWeights));
}
BENCHMARK(BM_Aggregate);

void BM_AirScore(benchmark::State& state) {
  std::map<Pollutant, double> means;
  for (const auto& [p, params] : PollutantModel::defaults().params) means[p] = params.threshold * 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(air_score(means));
}
BENCHMARK(BM_AirScore);

void BM_NormalizeWeights(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.001, 10.0);
  std::vector<PreferenceProfile> profiles(1024);
  for (auto& p : profiles) {
    for (auto& w : p.weights) w = u(rng);
    p.traffic_sensitive = u(rng) > 5;
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(normalize_weights(profiles[i++ % profiles.size()]));
}
BENCHMARK(BM_NormalizeWeights);

void BM_Entropy(benchmark::State& state) {
  std::vector<long long> counts(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = static_cast<long long>(3 + i * 7 % 11);
  for (auto _ : state) benchmark::DoNotOptimize(shannon_entropy(std::span<const long long>(counts)));
}
BENCHMARK(BM_Entropy)->Arg(4)->Arg(16);

}  // namespace
