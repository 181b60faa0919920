#include "urbanscore/resilience/breaker.hpp"

#include <cmath>

#include "urbanscore/error.hpp"

namespace urbanscore::resilience {

std::string_view to_string(BreakerStatus s) noexcept {
  switch (s) {
    case BreakerStatus::Closed: return "closed";
    case BreakerStatus::Open: return "open";
    case BreakerStatus::HalfOpen: return "half_open";
  }
  return "unknown";
}

std::string_view to_string(Admission a) noexcept {
  switch (a) {
    case Admission::Allow: return "allow";
    case Admission::AllowProbe: return "allow_probe";
    case Admission::Deny: return "deny";
  }
  return "unknown";
}

BreakerState breaker_on_result(BreakerState state, Outcome outcome, Timestamp now,
                               const BreakerPolicy& policy) {
  switch (state.status) {
    case BreakerStatus::Closed:
      if (outcome == Outcome::Success) {
        state.consecutive_failures = 0;
      } else if (++state.consecutive_failures >= policy.failure_threshold) {
        state.status = BreakerStatus::Open;
        state.opened_at = now;
      }
      return state;
    case BreakerStatus::HalfOpen:
      if (outcome == Outcome::Success) return BreakerState{};
      state.status = BreakerStatus::Open;
      state.opened_at = now;
      return state;
    case BreakerStatus::Open:
      // Late results from calls admitted before the trip change nothing.
      return state;
  }
  return state;
}

AdmissionResult breaker_allow(const BreakerState& state, Timestamp now, const BreakerPolicy& policy) {
  switch (state.status) {
    case BreakerStatus::Closed:
      return {Admission::Allow, state};
    case BreakerStatus::HalfOpen:
      return {Admission::Deny, state};
    case BreakerStatus::Open:
      if (state.opened_at && now - *state.opened_at < policy.open_duration) return {Admission::Deny, state};
      BreakerState probing = state;
      probing.status = BreakerStatus::HalfOpen;
      return {Admission::AllowProbe, probing};
  }
  return {Admission::Deny, state};
}

Admission CircuitBreaker::allow(Timestamp now) {
  std::lock_guard lock(mu_);
  auto r = breaker_allow(state_, now, policy_);
  state_ = r.state;
  return r.decision;
}

void CircuitBreaker::record(Outcome outcome, Timestamp now) {
  std::lock_guard lock(mu_);
  state_ = breaker_on_result(state_, outcome, now, policy_);
}

BreakerState CircuitBreaker::snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::chrono::microseconds backoff_delay(int attempt, const BackoffPolicy& policy, double draw) {
  require(attempt >= 1 && attempt <= policy.max_attempts, "backoff attempt out of range");
  require(draw >= 0.0 && draw <= 1.0, "backoff draw must be in [0, 1)");
  const double base_us = static_cast<double>(
      std::chrono::duration_cast<std::chrono::microseconds>(policy.base_delay).count());
  const double us = draw * base_us * std::pow(policy.multiplier, attempt - 1);
  return std::chrono::microseconds(static_cast<long long>(std::floor(us)));
}

}  // namespace urbanscore::resilience
