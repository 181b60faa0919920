#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "urbanscore/clock.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::resilience {

enum class Feed { Geocode, Facilities, Traffic, Air };
inline constexpr Feed kAllFeeds[] = {Feed::Geocode, Feed::Facilities, Feed::Traffic, Feed::Air};

std::string_view to_string(Feed f) noexcept;

struct CachePolicy {
  std::chrono::seconds geocode{24 * 3600};
  std::chrono::seconds facilities{10 * 60};
  std::chrono::seconds traffic{60};
  std::chrono::seconds air{3600};

  std::chrono::seconds ttl(Feed f) const noexcept;
  void validate() const;
};

/// `v1:<provider>:<op>:<param-hash>`; the hash covers the canonical (sorted
/// keys) JSON serialisation of the parameters.
std::string make_cache_key(std::string_view provider, std::string_view op, const nlohmann::json& params);

/// First 16 hex digits of SHA-256.
std::string short_hash(std::string_view data);

struct CacheEntry {
  std::string bytes;
  Timestamp expires_at;
};

/// Out-of-process cache contract. `get` may return entries past their expiry;
/// callers decide whether an entry is fresh.
class SharedCache {
 public:
  virtual ~SharedCache() = default;
  virtual std::optional<CacheEntry> get(const std::string& key) = 0;
  virtual void set(const std::string& key, std::string bytes, std::chrono::milliseconds ttl) = 0;
};

/// Mutex-guarded map. Expired entries are kept for `retention` past expiry so
/// they can still be served stale.
class InProcessCache final : public SharedCache {
 public:
  explicit InProcessCache(std::shared_ptr<const Clock> clock,
                          std::chrono::seconds retention = std::chrono::hours(24),
                          std::size_t capacity = 50'000);

  std::optional<CacheEntry> get(const std::string& key) override;
  void set(const std::string& key, std::string bytes, std::chrono::milliseconds ttl) override;
  void put(const std::string& key, CacheEntry entry);
  std::size_t size() const;

 private:
  void evict_locked(Timestamp now);

  std::shared_ptr<const Clock> clock_;
  std::chrono::seconds retention_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CacheEntry> entries_;
};

/// Client for a KvServer over HTTP:
///   GET  /v1/kv/<key>            -> 200 body, header X-Expires-At (µs since epoch) | 404
///   PUT  /v1/kv/<key>?ttl_ms=<n> -> 204
class HttpSharedCache final : public SharedCache {
 public:
  explicit HttpSharedCache(std::string base_url,
                           std::chrono::milliseconds timeout = std::chrono::milliseconds(500));

  /// Transport failures surface as Error(Unavailable).
  std::optional<CacheEntry> get(const std::string& key) override;
  void set(const std::string& key, std::string bytes, std::chrono::milliseconds ttl) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

/// Small key-value server backing HttpSharedCache, so several engine processes
/// can share one cache.
class KvServer {
 public:
  explicit KvServer(std::shared_ptr<const Clock> clock);
  ~KvServer();
  KvServer(const KvServer&) = delete;
  KvServer& operator=(const KvServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks the calling thread.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CachePolicy cache_policy_from(const Config& cfg);
std::shared_ptr<SharedCache> make_shared_cache(const Config& cfg, std::shared_ptr<const Clock> clock);

}  // namespace urbanscore::resilience
