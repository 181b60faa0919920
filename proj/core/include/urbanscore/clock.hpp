#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace urbanscore {

/// UTC instant with microsecond resolution. All persisted timestamps use it.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

/// Manually driven clock for simulations and tests.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_(start) {}

  Timestamp now() const override;
  void set(Timestamp t);
  void advance(std::chrono::microseconds d);

 private:
  mutable std::mutex mu_;
  Timestamp now_;
};

/// "2024-05-01T12:00:00.000000Z". Independent of the host timezone.
std::string to_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.ffffff]Z" (the trailing Z is optional).
std::optional<Timestamp> parse_iso8601(std::string_view text);

inline std::int64_t to_micros(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_micros(std::int64_t us) {
  return Timestamp{std::chrono::microseconds{us}};
}

}  // namespace urbanscore
