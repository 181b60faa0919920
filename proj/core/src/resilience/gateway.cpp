#include "urbanscore/resilience/gateway.hpp"

#include <spdlog/spdlog.h>

#include <thread>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"

namespace urbanscore::resilience {

std::string_view to_string(Freshness f) noexcept {
  switch (f) {
    case Freshness::Live: return "live";
    case Freshness::Cached: return "cached";
    case Freshness::Stale: return "stale";
  }
  return "unknown";
}

GatewayOptions gateway_options_from(const Config& cfg) {
  GatewayOptions o;
  o.cache = cache_policy_from(cfg);
  o.breaker.failure_threshold = static_cast<int>(cfg.get_int("breaker.failure_threshold", 3));
  o.breaker.open_duration = std::chrono::seconds(cfg.get_int("breaker.open_duration_s", 60));
  o.backoff.base_delay = std::chrono::milliseconds(cfg.get_int("backoff.base_delay_ms", 200));
  o.backoff.multiplier = cfg.get_double("backoff.multiplier", 2.0);
  o.backoff.max_attempts = static_cast<int>(cfg.get_int("backoff.max_attempts", 3));
  require(o.breaker.failure_threshold >= 1, "breaker.failure_threshold must be >= 1");
  require(o.backoff.max_attempts >= 1, "backoff.max_attempts must be >= 1");
  require(o.backoff.multiplier >= 1.0, "backoff.multiplier must be >= 1");
  return o;
}

ResilientGateway::ResilientGateway(std::shared_ptr<const Clock> clock, std::shared_ptr<SharedCache> shared,
                                   GatewayOptions options, Sleeper sleeper)
    : clock_(std::move(clock)),
      shared_(std::move(shared)),
      options_(options),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })),
      local_(clock_),
      rng_(options.seed) {
  options_.cache.validate();
  for (Feed f : kAllFeeds) breakers_.emplace(f, std::make_unique<CircuitBreaker>(options_.breaker));
}

BreakerState ResilientGateway::breaker_state(Feed feed) const { return breakers_.at(feed)->snapshot(); }

std::map<Feed, BreakerState> ResilientGateway::breaker_states() const {
  std::map<Feed, BreakerState> out;
  for (const auto& [feed, b] : breakers_) out.emplace(feed, b->snapshot());
  return out;
}

void ResilientGateway::set_observer(std::function<void(const CallEvent&)> observer) {
  std::lock_guard lock(observer_mu_);
  observer_ = std::move(observer);
}

void ResilientGateway::emit(const CallEvent& event) {
  spdlog::debug("provider_call feed={} key={} tier={} freshness={} attempts={} breaker={} latency_us={}{}{}",
                to_string(event.feed), event.key, event.tier, to_string(event.freshness), event.attempts,
                to_string(event.breaker), event.latency.count(), event.error.empty() ? "" : " error=",
                event.error);
  std::function<void(const CallEvent&)> observer;
  {
    std::lock_guard lock(observer_mu_);
    observer = observer_;
  }
  if (observer) observer(event);
}

double ResilientGateway::draw() {
  std::lock_guard lock(rng_mu_);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

std::optional<CacheEntry> ResilientGateway::shared_get(const std::string& key) {
  if (!shared_) return std::nullopt;
  try {
    return shared_->get(key);
  } catch (const std::exception& e) {
    spdlog::warn("shared cache get failed: {}", e.what());
    return std::nullopt;
  }
}

void ResilientGateway::shared_set(const std::string& key, const std::string& bytes,
                                  std::chrono::milliseconds ttl) {
  if (!shared_) return;
  try {
    shared_->set(key, bytes, ttl);
  } catch (const std::exception& e) {
    spdlog::warn("shared cache set failed: {}", e.what());
  }
}

CallResult ResilientGateway::cached_call(const std::string& key, Feed feed,
                                         const std::function<std::string()>& fetch) {
  const auto started = std::chrono::steady_clock::now();
  CallEvent event{key, feed, Freshness::Live, "", 0, BreakerStatus::Closed, {}, {}};
  auto finish = [&] {
    event.breaker = breaker_state(feed).status;
    event.latency =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - started);
    emit(event);
  };
  try {
    auto result = lookup_or_fetch(key, feed, fetch, event);
    event.freshness = result.freshness;
    finish();
    return result;
  } catch (const std::exception& e) {
    event.tier = "error";
    event.error = e.what();
    finish();
    throw;
  }
}

CallResult ResilientGateway::lookup_or_fetch(const std::string& key, Feed feed,
                                             const std::function<std::string()>& fetch, CallEvent& event) {
  const Timestamp now = clock_->now();
  auto local = local_.get(key);
  if (local && now < local->expires_at) {
    event.tier = "local";
    return {local->bytes, Freshness::Cached};
  }
  auto shared = shared_get(key);
  if (shared && now < shared->expires_at) {
    local_.put(key, *shared);
    event.tier = "shared";
    return {shared->bytes, Freshness::Cached};
  }
  std::optional<CacheEntry> stale = local;
  if (shared && (!stale || shared->expires_at > stale->expires_at)) stale = shared;

  std::promise<CallResult> promise;
  std::shared_future<CallResult> follower;
  {
    std::lock_guard lock(flights_mu_);
    auto it = flights_.find(key);
    if (it != flights_.end()) {
      follower = it->second;
    } else {
      flights_.emplace(key, promise.get_future().share());
    }
  }
  if (follower.valid()) {
    // Coalesced onto another caller's fetch; no provider call of our own.
    event.tier = "coalesced";
    CallResult r = follower.get();
    if (r.freshness == Freshness::Live) r.freshness = Freshness::Cached;
    return r;
  }

  auto done = [&] {
    std::lock_guard lock(flights_mu_);
    flights_.erase(key);
  };
  try {
    CallResult r;
    auto again = local_.get(key);
    if (again && clock_->now() < again->expires_at) {
      event.tier = "local";
      r = {again->bytes, Freshness::Cached};
    } else {
      r = fetch_through_breaker(key, feed, fetch, stale, event);
    }
    promise.set_value(r);
    done();
    return r;
  } catch (...) {
    promise.set_exception(std::current_exception());
    done();
    throw;
  }
}

CallResult ResilientGateway::fetch_through_breaker(const std::string& key, Feed feed,
                                                   const std::function<std::string()>& fetch,
                                                   const std::optional<CacheEntry>& stale, CallEvent& event) {
  CircuitBreaker& breaker = *breakers_.at(feed);
  auto serve_stale_or_fail = [&](const std::string& reason) -> CallResult {
    if (stale) {
      event.tier = "stale";
      spdlog::info("serving stale {} entry: {}", to_string(feed), reason);
      return {stale->bytes, Freshness::Stale};
    }
    fail(ErrorCode::Unavailable, std::string(to_string(feed)) + " unavailable: " + reason);
  };

  const Admission admission = breaker.allow(clock_->now());
  if (admission == Admission::Deny) return serve_stale_or_fail("circuit open");
  const int max_attempts = admission == Admission::AllowProbe ? 1 : options_.backoff.max_attempts;

  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    event.attempts = attempt;
    try {
      std::string bytes = fetch();
      breaker.record(Outcome::Success, clock_->now());
      const auto ttl = std::chrono::duration_cast<std::chrono::milliseconds>(options_.cache.ttl(feed));
      local_.set(key, bytes, ttl);
      shared_set(key, bytes, ttl);
      event.tier = "provider";
      return {std::move(bytes), Freshness::Live};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ProviderUnavailable) {
        last_error = e.what();
        if (attempt < max_attempts) sleeper_(backoff_delay(attempt, options_.backoff, draw()));
        continue;
      }
      if (e.code() == ErrorCode::MalformedResponse) {
        breaker.record(Outcome::Failure, clock_->now());
        return serve_stale_or_fail(e.what());
      }
      breaker.record(Outcome::Success, clock_->now());
      throw;
    } catch (const std::exception& e) {
      breaker.record(Outcome::Failure, clock_->now());
      return serve_stale_or_fail(e.what());
    }
  }
  breaker.record(Outcome::Failure, clock_->now());
  return serve_stale_or_fail(last_error);
}

}  // namespace urbanscore::resilience
