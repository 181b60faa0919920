#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "urbanscore/clock.hpp"
#include "urbanscore/resilience/breaker.hpp"
#include "urbanscore/resilience/cache.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::resilience {

enum class Freshness { Live, Cached, Stale };
std::string_view to_string(Freshness f) noexcept;

struct CallResult {
  std::string bytes;
  Freshness freshness = Freshness::Live;
};

/// Emitted once per cached_call.
struct CallEvent {
  std::string key;
  Feed feed;
  Freshness freshness;
  /// "local", "shared", "provider", "stale" or "error".
  std::string tier;
  int attempts = 0;
  BreakerStatus breaker = BreakerStatus::Closed;
  std::chrono::microseconds latency{0};
  std::string error;
};

struct GatewayOptions {
  CachePolicy cache;
  BreakerPolicy breaker;
  BackoffPolicy backoff;
  std::uint64_t seed = 0x5eed;
};

GatewayOptions gateway_options_from(const Config& cfg);

using Sleeper = std::function<void(std::chrono::microseconds)>;

/// Wraps provider calls with the two-tier cache, single-flight coalescing,
/// a breaker per feed, and jittered retries of ProviderUnavailable failures.
///
/// Error handling of `fetch`:
///   ProviderUnavailable  retried, then counted as one breaker failure
///   MalformedResponse    one breaker failure, not retried
///   other Error codes    the provider answered; counted as success, rethrown
/// When a fetch fails or the breaker denies, an expired entry is served as
/// Stale; with nothing cached the call throws Error(Unavailable).
class ResilientGateway {
 public:
  ResilientGateway(std::shared_ptr<const Clock> clock, std::shared_ptr<SharedCache> shared,
                   GatewayOptions options = {}, Sleeper sleeper = {});

  CallResult cached_call(const std::string& key, Feed feed, const std::function<std::string()>& fetch);

  /// Typed wrapper: values round-trip through their JSON representation.
  template <class T>
  std::pair<T, Freshness> call(const std::string& key, Feed feed, const std::function<T()>& fetch) {
    auto r = cached_call(key, feed, [&] { return nlohmann::json(fetch()).dump(); });
    return {nlohmann::json::parse(r.bytes).template get<T>(), r.freshness};
  }

  BreakerState breaker_state(Feed feed) const;
  std::map<Feed, BreakerState> breaker_states() const;

  void set_observer(std::function<void(const CallEvent&)> observer);
  const GatewayOptions& options() const noexcept { return options_; }

 private:
  CallResult lookup_or_fetch(const std::string& key, Feed feed, const std::function<std::string()>& fetch,
                             CallEvent& event);
  CallResult fetch_through_breaker(const std::string& key, Feed feed,
                                   const std::function<std::string()>& fetch,
                                   const std::optional<CacheEntry>& stale, CallEvent& event);
  std::optional<CacheEntry> shared_get(const std::string& key);
  void shared_set(const std::string& key, const std::string& bytes, std::chrono::milliseconds ttl);
  double draw();
  void emit(const CallEvent& event);

  std::shared_ptr<const Clock> clock_;
  std::shared_ptr<SharedCache> shared_;
  GatewayOptions options_;
  Sleeper sleeper_;
  InProcessCache local_;
  std::map<Feed, std::unique_ptr<CircuitBreaker>> breakers_;

  std::mutex flights_mu_;
  std::unordered_map<std::string, std::shared_future<CallResult>> flights_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;

  std::mutex observer_mu_;
  std::function<void(const CallEvent&)> observer_;
};

}  // namespace urbanscore::resilience
