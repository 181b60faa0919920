#include "urbanscore/resilience/cache.hpp"

#include <httplib.h>
#include <openssl/sha.h>

#include <algorithm>
#include <fmt/format.h>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/transport.hpp"

namespace urbanscore::resilience {

std::string_view to_string(Feed f) noexcept {
  switch (f) {
    case Feed::Geocode: return "geocode";
    case Feed::Facilities: return "facilities";
    case Feed::Traffic: return "traffic";
    case Feed::Air: return "air";
  }
  return "unknown";
}

std::chrono::seconds CachePolicy::ttl(Feed f) const noexcept {
  switch (f) {
    case Feed::Geocode: return geocode;
    case Feed::Facilities: return facilities;
    case Feed::Traffic: return traffic;
    case Feed::Air: return air;
  }
  return traffic;
}

void CachePolicy::validate() const {
  for (Feed f : kAllFeeds)
    require(ttl(f).count() > 0, fmt::format("cache TTL for {} must be positive", to_string(f)));
}

std::string short_hash(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::string out;
  for (int i = 0; i < 8; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string make_cache_key(std::string_view provider, std::string_view op, const nlohmann::json& params) {
  return fmt::format("v1:{}:{}:{}", provider, op, short_hash(params.dump()));
}

// --- in-process ------------------------------------------------------------

InProcessCache::InProcessCache(std::shared_ptr<const Clock> clock, std::chrono::seconds retention,
                               std::size_t capacity)
    : clock_(std::move(clock)), retention_(retention), capacity_(capacity) {}

std::optional<CacheEntry> InProcessCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  if (clock_->now() > it->second.expires_at + retention_) {
    entries_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

void InProcessCache::set(const std::string& key, std::string bytes, std::chrono::milliseconds ttl) {
  put(key, CacheEntry{std::move(bytes), clock_->now() + ttl});
}

void InProcessCache::put(const std::string& key, CacheEntry entry) {
  std::lock_guard lock(mu_);
  entries_[key] = std::move(entry);
  if (entries_.size() > capacity_) evict_locked(clock_->now());
}

std::size_t InProcessCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void InProcessCache::evict_locked(Timestamp now) {
  std::erase_if(entries_, [&](const auto& kv) { return now > kv.second.expires_at + retention_; });
  while (entries_.size() > capacity_) {
    auto oldest = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return a.second.expires_at < b.second.expires_at;
    });
    entries_.erase(oldest);
  }
}

// --- HTTP client -----------------------------------------------------------

HttpSharedCache::HttpSharedCache(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

namespace {

httplib::Client make_client(const std::string& base_url, std::chrono::milliseconds timeout) {
  httplib::Client client(geodata::split_base_url(base_url).first);
  const auto s = timeout.count() / 1000;
  const auto us = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(s, us);
  client.set_read_timeout(s, us);
  client.set_write_timeout(s, us);
  return client;
}

std::string kv_path(const std::string& base_url, const std::string& key) {
  return geodata::split_base_url(base_url).second + "/v1/kv/" + geodata::url_encode(key);
}

}  // namespace

std::optional<CacheEntry> HttpSharedCache::get(const std::string& key) {
  auto client = make_client(base_url_, timeout_);
  auto res = client.Get(kv_path(base_url_, key),
                        httplib::Headers{{"User-Agent", std::string(geodata::kUserAgent)}});
  if (!res) fail(ErrorCode::Unavailable, "shared cache unreachable: " + httplib::to_string(res.error()));
  if (res->status == 404) return std::nullopt;
  if (res->status != 200) fail(ErrorCode::Unavailable, fmt::format("shared cache HTTP {}", res->status));
  const auto expires = res->get_header_value("X-Expires-At");
  if (expires.empty()) fail(ErrorCode::Unavailable, "shared cache response without expiry");
  return CacheEntry{res->body, from_micros(std::stoll(expires))};
}

void HttpSharedCache::set(const std::string& key, std::string bytes, std::chrono::milliseconds ttl) {
  auto client = make_client(base_url_, timeout_);
  const std::string path = kv_path(base_url_, key) + "?ttl_ms=" + std::to_string(ttl.count());
  auto res = client.Put(path, httplib::Headers{{"User-Agent", std::string(geodata::kUserAgent)}}, bytes,
                        "application/octet-stream");
  if (!res) fail(ErrorCode::Unavailable, "shared cache unreachable: " + httplib::to_string(res.error()));
  if (res->status / 100 != 2) fail(ErrorCode::Unavailable, fmt::format("shared cache HTTP {}", res->status));
}

// --- server ----------------------------------------------------------------

struct KvServer::Impl {
  std::shared_ptr<const Clock> clock;
  InProcessCache store;
  httplib::Server server;
  std::thread thread;

  explicit Impl(std::shared_ptr<const Clock> c) : clock(c), store(c) {
    server.Get(R"(/v1/kv/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = store.get(req.matches[1]);
      if (!entry) {
        res.status = 404;
        return;
      }
      res.set_header("X-Expires-At", std::to_string(to_micros(entry->expires_at)));
      res.set_content(entry->bytes, "application/octet-stream");
    });
    server.Put(R"(/v1/kv/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      long long ttl_ms = 0;
      try {
        ttl_ms = std::stoll(req.get_param_value("ttl_ms"));
      } catch (const std::exception&) {
        ttl_ms = 0;
      }
      if (ttl_ms <= 0) {
        res.status = 400;
        return;
      }
      store.set(req.matches[1], req.body, std::chrono::milliseconds(ttl_ms));
      res.status = 204;
    });
  }
};

KvServer::KvServer(std::shared_ptr<const Clock> clock) : impl_(std::make_unique<Impl>(std::move(clock))) {}

KvServer::~KvServer() { stop(); }

int KvServer::start(const std::string& host, int port) {
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

void KvServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) fail(ErrorCode::Unavailable, fmt::format("cannot bind {}:{}", host, port));
}

void KvServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

// --- config ----------------------------------------------------------------

CachePolicy cache_policy_from(const Config& cfg) {
  CachePolicy p;
  p.geocode = std::chrono::seconds(cfg.get_int("cache.ttl.geocode_s", p.geocode.count()));
  p.facilities = std::chrono::seconds(cfg.get_int("cache.ttl.facilities_s", p.facilities.count()));
  p.traffic = std::chrono::seconds(cfg.get_int("cache.ttl.traffic_s", p.traffic.count()));
  p.air = std::chrono::seconds(cfg.get_int("cache.ttl.air_s", p.air.count()));
  p.validate();
  return p;
}

std::shared_ptr<SharedCache> make_shared_cache(const Config& cfg, std::shared_ptr<const Clock> clock) {
  const std::string kind = cfg.get_string("cache.shared", "memory");
  if (kind == "memory") return std::make_shared<InProcessCache>(std::move(clock));
  if (kind == "http") return std::make_shared<HttpSharedCache>(cfg.get_string("cache.shared_url"));
  fail(ErrorCode::InvalidArgument, "cache.shared must be memory or http");
}

}  // namespace urbanscore::resilience
