#include "urbanscore/service/http_api.hpp"

#include <httplib.h>
#include <openssl/rand.h>
#include <spdlog/spdlog.h>

#include <limits>
#include <thread>

#include <fmt/format.h>

#include "urbanscore/service/codec.hpp"
#include "urbanscore/service/stats.hpp"

namespace urbanscore::service {

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidRequest:
    case ErrorCode::InfeasibleProfile:
      return 400;
    case ErrorCode::Unknown:
    case ErrorCode::UnknownLocation:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::Duplicate:
      return 409;
    case ErrorCode::GeocodeFailed:
      return 422;
    case ErrorCode::StorageUnavailable:
    case ErrorCode::Unavailable:
    case ErrorCode::ProviderUnavailable:
      return 503;
    default:
      return 500;
  }
}

std::optional<std::string> bearer_user(std::string_view authorization) {
  constexpr std::string_view prefix = "Bearer ";
  if (authorization.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view id = authorization.substr(prefix.size());
  while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
  while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
  if (id.empty() || id.size() > 128) return std::nullopt;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '@' || c == '-';
    if (!ok) return std::nullopt;
  }
  return std::string(id);
}

namespace {

std::optional<std::string> cookie_value(std::string_view header, std::string_view name) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    auto end = header.find(';', pos);
    if (end == std::string_view::npos) end = header.size();
    std::string_view pair = header.substr(pos, end - pos);
    while (!pair.empty() && pair.front() == ' ') pair.remove_prefix(1);
    const auto eq = pair.find('=');
    if (eq != std::string_view::npos && pair.substr(0, eq) == name) return std::string(pair.substr(eq + 1));
    pos = end + 1;
  }
  return std::nullopt;
}

}  // namespace

bool csrf_ok(std::string_view cookie_header, std::string_view token_header) {
  if (cookie_header.empty()) return true;
  const auto cookie = cookie_value(cookie_header, "csrf_token");
  if (!cookie || cookie->empty() || token_header.empty()) return false;
  return *cookie == token_header;
}

struct HttpApi::Impl {
  Engine& engine;
  ApiOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(Engine& e, ApiOptions o) : engine(e), options(std::move(o)) { routes(); }

  void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_header("X-Content-Type-Options", "nosniff");
    res.set_header("Cache-Control", "no-store");
    res.set_content(encode(body), "application/json; charset=utf-8");
  }

  void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send(res, status, {{"error", {{"code", code}, {"message", message}}}});
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps exceptions to status codes and enforces the anti-forgery check.
  Handler guard(Handler inner, bool state_changing) {
    return [this, inner = std::move(inner), state_changing](const httplib::Request& req, httplib::Response& res) {
      if (!options.cors_origin.empty()) res.set_header("Access-Control-Allow-Origin", options.cors_origin);
      if (state_changing && !csrf_ok(req.get_header_value("Cookie"), req.get_header_value("X-CSRF-Token"))) {
        send_error(res, 403, "Forbidden", "missing or mismatched anti-forgery token");
        return;
      }
      try {
        inner(req, res);
      } catch (const Error& e) {
        send_error(res, http_status_for(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "InvalidRequest", e.what());
      } catch (const std::exception& e) {
        spdlog::error("unhandled error in {} {}: {}", req.method, req.path, e.what());
        send_error(res, 500, "Internal", "internal error");
      }
    };
  }

  static json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::InvalidRequest, std::string("body is not JSON: ") + e.what());
    }
  }

  static std::string require_user(const httplib::Request& req) {
    auto user = bearer_user(req.get_header_value("Authorization"));
    if (!user) fail(ErrorCode::InvalidRequest, "missing bearer identity");
    return *user;
  }

  static Timestamp time_param(const httplib::Request& req, const char* name, Timestamp fallback) {
    if (!req.has_param(name)) return fallback;
    auto t = parse_iso8601(req.get_param_value(name));
    if (!t) fail(ErrorCode::InvalidRequest, std::string(name) + " must be an ISO-8601 UTC timestamp");
    return *t;
  }

  static persistence::Id id_from(const std::string& text) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidRequest, "bad id " + text);
  }

  void routes() {
    const Timestamp min_time{};
    const Timestamp max_time = from_micros(std::numeric_limits<std::int64_t>::max());

    server.Post("/api/v1/evaluate", guard([this](const auto& req, auto& res) {
      EvaluateRequest request = evaluate_request_from_json(body_json(req));
      if (auto user = bearer_user(req.get_header_value("Authorization"))) request.user_id = *user;
      send(res, 200, to_json(engine.evaluate(request)));
    }, true));

    server.Get(R"(/api/v1/locations/(-?\d+)/scores)", guard([this, min_time, max_time](const auto& req, auto& res) {
      const auto id = id_from(req.matches[1]);
      const auto since = time_param(req, "since", min_time);
      const auto until = time_param(req, "until", max_time);
      if (since > until) fail(ErrorCode::InvalidRequest, "since must not be after until");
      json items = json::array();
      for (const auto& r : engine.store().list_scores(id, since, until)) items.push_back(to_json(r));
      send(res, 200, {{"location_id", id}, {"scores", items}});
    }, false));

    server.Get("/api/v1/profile", guard([this](const auto& req, auto& res) {
      send(res, 200, to_json(engine.store().load_profile(require_user(req))));
    }, false));

    server.Put("/api/v1/profile", guard([this](const auto& req, auto& res) {
      const auto user = require_user(req);
      const auto update = profile_update_from_json(body_json(req));
      const auto stored = scoring::normalize_weights({update.weights, false});
      send(res, 200, to_json(engine.store().save_profile(user, stored, update.traffic_sensitive, update.purpose)));
    }, true));

    server.Get("/api/v1/favourites", guard([this](const auto& req, auto& res) {
      json items = json::array();
      for (const auto& f : engine.store().list_favourites(require_user(req))) items.push_back(to_json(f));
      send(res, 200, {{"favourites", items}});
    }, false));

    server.Post("/api/v1/favourites", guard([this](const auto& req, auto& res) {
      const auto user = require_user(req);
      const json body = body_json(req);
      if (!body.contains("location_id") || !body.at("location_id").is_number_integer())
        fail(ErrorCode::InvalidRequest, "location_id is required");
      engine.store().ensure_user(user);
      send(res, 201, to_json(engine.store().add_favourite(user, body.at("location_id").get<persistence::Id>())));
    }, true));

    server.Delete(R"(/api/v1/favourites/(-?\d+))", guard([this](const auto& req, auto& res) {
      engine.store().remove_favourite(require_user(req), id_from(req.matches[1]));
      send(res, 200, {{"removed", true}});
    }, true));

    server.Get("/api/v1/stats", guard([this, min_time, max_time](const auto& req, auto& res) {
      const auto since = time_param(req, "since", min_time);
      const auto until = time_param(req, "until", max_time);
      if (since > until) fail(ErrorCode::InvalidRequest, "since must not be after until");
      send(res, 200, to_json(compute_stats(engine.store(), since, until)));
    }, false));

    server.Get("/api/v1/csrf", guard([this](const auto&, auto& res) {
      unsigned char bytes[16];
      if (RAND_bytes(bytes, sizeof bytes) != 1) fail(ErrorCode::Unavailable, "no randomness for token");
      std::string token;
      for (unsigned char b : bytes) token += fmt::format("{:02x}", b);
      res.set_header("Set-Cookie", "csrf_token=" + token + "; Path=/; SameSite=Strict");
      send(res, 200, {{"token", token}});
    }, false));

    server.Get("/healthz", guard([this](const auto&, auto& res) {
      json breakers = json::object();
      bool all_closed = true;
      for (const auto& [feed, state] : engine.gateway().breaker_states()) {
        json b{{"state", std::string(resilience::to_string(state.status))},
               {"consecutive_failures", state.consecutive_failures}};
        b["opened_at"] = state.opened_at ? json(to_iso8601(*state.opened_at)) : json(nullptr);
        all_closed = all_closed && state.status == resilience::BreakerStatus::Closed;
        breakers[std::string(resilience::to_string(feed))] = b;
      }
      send(res, 200, {{"status", all_closed ? "ok" : "degraded"}, {"breakers", breakers}});
    }, false));

    server.Options(R"(.*)", [this](const auto&, auto& res) {
      if (!options.cors_origin.empty()) {
        res.set_header("Access-Control-Allow-Origin", options.cors_origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type, X-CSRF-Token");
      }
      res.status = 204;
    });

    server.set_error_handler([this](const auto&, auto& res) {
      if (res.body.empty() && res.status == 404) send_error(res, 404, "Unknown", "no such route");
    });
  }
};

HttpApi::HttpApi(Engine& engine, ApiOptions options) : impl_(std::make_unique<Impl>(engine, std::move(options))) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorCode::Unavailable, fmt::format("cannot bind {}:{}", host, port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpApi::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) fail(ErrorCode::Unavailable, fmt::format("cannot bind {}:{}", host, port));
}

void HttpApi::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace urbanscore::service
