#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string_view>

#include "urbanscore/clock.hpp"

namespace urbanscore::resilience {

enum class BreakerStatus { Closed, Open, HalfOpen };
enum class Outcome { Success, Failure };
enum class Admission { Allow, AllowProbe, Deny };

std::string_view to_string(BreakerStatus s) noexcept;
std::string_view to_string(Admission a) noexcept;

struct BreakerPolicy {
  int failure_threshold = 3;
  std::chrono::seconds open_duration{60};
};

/// Invariants: consecutive_failures < threshold while Closed; opened_at is set
/// exactly when the breaker is not Closed. HalfOpen means a probe is in flight.
struct BreakerState {
  BreakerStatus status = BreakerStatus::Closed;
  int consecutive_failures = 0;
  std::optional<Timestamp> opened_at;

  friend bool operator==(const BreakerState&, const BreakerState&) = default;
};

BreakerState breaker_on_result(BreakerState state, Outcome outcome, Timestamp now,
                               const BreakerPolicy& policy = {});

struct AdmissionResult {
  Admission decision;
  BreakerState state;
};

/// Closed admits. Open denies until open_duration has elapsed since opened_at,
/// then admits a single probe and moves to HalfOpen. HalfOpen denies.
AdmissionResult breaker_allow(const BreakerState& state, Timestamp now,
                              const BreakerPolicy& policy = {});

/// Thread-safe breaker; every transition happens under one lock.
class CircuitBreaker {
 public:
  explicit CircuitBreaker(BreakerPolicy policy = {}) : policy_(policy) {}

  Admission allow(Timestamp now);
  void record(Outcome outcome, Timestamp now);
  BreakerState snapshot() const;
  const BreakerPolicy& policy() const noexcept { return policy_; }

 private:
  BreakerPolicy policy_;
  mutable std::mutex mu_;
  BreakerState state_;
};

struct BackoffPolicy {
  std::chrono::milliseconds base_delay{200};
  double multiplier = 2.0;
  int max_attempts = 3;
};

/// Full jitter: draw * base_delay * multiplier^(attempt - 1), with draw in [0, 1).
std::chrono::microseconds backoff_delay(int attempt, const BackoffPolicy& policy, double draw);

}  // namespace urbanscore::resilience
