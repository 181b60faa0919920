#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "urbanscore/error.hpp"
#include "urbanscore/service/engine.hpp"

namespace urbanscore::service {

struct ApiOptions {
  /// Sent as Access-Control-Allow-Origin when non-empty.
  std::string cors_origin;
};

/// HTTP status for an error code: 400 invalid request, 404 unknown,
/// 409 duplicate, 422 geocoding failure, 503 storage or feed unavailable.
int http_status_for(ErrorCode code) noexcept;

/// User id from `Authorization: Bearer <id>`; ids are 1-128 characters of
/// [A-Za-z0-9._@-].
std::optional<std::string> bearer_user(std::string_view authorization);

/// Double-submit check for state-changing requests. Requests that carry no
/// cookies (API clients) pass; otherwise the `csrf_token` cookie must equal
/// the X-CSRF-Token header.
bool csrf_ok(std::string_view cookie_header, std::string_view token_header);

/// REST surface over an Engine:
///   POST   /api/v1/evaluate
///   GET    /api/v1/locations/{id}/scores?since&until
///   GET    /api/v1/profile, PUT /api/v1/profile
///   GET    /api/v1/favourites, POST /api/v1/favourites, DELETE /api/v1/favourites/{location_id}
///   GET    /api/v1/stats?since&until
///   GET    /api/v1/csrf   issues the anti-forgery cookie and token
///   GET    /healthz
class HttpApi {
 public:
  explicit HttpApi(Engine& engine, ApiOptions options = {});
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Serves on a background thread; port 0 picks a free port. Returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace urbanscore::service
