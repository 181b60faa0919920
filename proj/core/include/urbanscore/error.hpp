#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace urbanscore {

enum class ErrorCode {
  InvalidArgument,      // precondition violation
  NotFound,             // provider returned an empty result set
  ProviderUnavailable,  // transport failure or 5xx after retries
  MalformedResponse,
  NoSegment,            // traffic: no road segment near the point
  NoData,
  InvalidSample,
  InfeasibleProfile,
  Unavailable,          // resilience: fetch failed and nothing cached
  UnknownLocation,
  StorageUnavailable,
  Duplicate,
  Unknown,
  GeocodeFailed,
  InvalidRequest,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace urbanscore
