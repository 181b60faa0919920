#include <benchmark/benchmark.h>

#include "urbanscore/clock.hpp"
#include "urbanscore/resilience/cache.hpp"
#include "urbanscore/resilience/gateway.hpp"

using namespace urbanscore;
using namespace urbanscore::resilience;

namespace {

void BM_GatewayCacheHit(benchmark::State& state) {
  auto clock = std::make_shared<SystemClock>();
  ResilientGateway gateway(clock, std::make_shared<InProcessCache>(clock), GatewayOptions{},
                           [](std::chrono::microseconds) {});
  const auto key = make_cache_key("facilities", "fetch", {{"lat", 44.4108}, {"lon", 26.1084}, {"radius", 800}});
  const std::string payload(4096, 'x');
  gateway.cached_call(key, Feed::Facilities, [&] { return payload; });
  for (auto _ : state) benchmark::DoNotOptimize(gateway.cached_call(key, Feed::Facilities, [&] { return payload; }));
}
BENCHMARK(BM_GatewayCacheHit);

void BM_CacheKey(benchmark::State& state) {
  const nlohmann::json params{{"lat", 44.4108}, {"lon", 26.1084}, {"radius", 800}};
  for (auto _ : state) benchmark::DoNotOptimize(make_cache_key("facilities", "fetch", params));
}
BENCHMARK(BM_CacheKey);

}  // namespace
