#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/geo.hpp"
#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::persistence {

using Id = std::int64_t;

enum class Purpose { Residence, Investment, ShortTerm };
inline constexpr Purpose kAllPurposes[] = {Purpose::Residence, Purpose::Investment, Purpose::ShortTerm};

std::string_view to_string(Purpose p) noexcept;
std::optional<Purpose> purpose_from_string(std::string_view s) noexcept;

/// (lat, lon) unique at 6-decimal rounding.
struct LocationRecord {
  Id id = 0;
  GeoPoint point;
  std::string display_name;
  /// Suburb / city district from the address hierarchy; may be empty.
  std::string district;
  Timestamp created_at;

  friend bool operator==(const LocationRecord&, const LocationRecord&) = default;
};

struct LocationScoreRecord {
  Id id = 0;
  Id location_id = 0;
  scoring::SubScores sub_scores;
  int aggregate = 0;
  std::string profile_hash;
  Timestamp evaluated_at;
};

struct UserProfileRecord {
  std::string user_id;
  /// Bounded-simplex weights without the traffic-sensitivity factor applied.
  scoring::WeightVector weights = scoring::kDefaultWeights;
  bool traffic_sensitive = false;
  Purpose declared_purpose = Purpose::Residence;
  Timestamp updated_at;

  scoring::PreferenceProfile profile() const { return {weights, traffic_sensitive}; }
};

struct FavouriteRecord {
  Id id = 0;
  std::string user_id;
  Id location_id = 0;
  Timestamp saved_at;
};

struct BatchPolicy {
  std::chrono::milliseconds flush_interval{1000};
  std::size_t batch_size = 64;
};

/// Storage contract shared by every backend.
///
/// Public members validate arguments and serialise access; backends implement
/// the protected hooks. Score writes are buffered and flushed when the buffer
/// reaches batch_size, on the flush_interval timer, before any read or delete,
/// and on close. evaluated_at is assigned at save time and is non-decreasing in
/// record id, so per-location append order survives batching.
class Store {
 public:
  virtual ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  LocationRecord upsert_location(const GeoPoint& point, const std::string& display_name,
                                 const std::string& district = {});
  std::optional<LocationRecord> find_location(Id id);
  std::vector<LocationRecord> list_locations();
  /// Cascades to scores and favourites.
  void delete_location(Id id);

  /// UnknownLocation when the location does not exist.
  LocationScoreRecord save_score(Id location_id, const scoring::SubScores& sub, int aggregate,
                                 const std::string& profile_hash);
  void flush();
  /// Half-open [since, until), ascending evaluated_at. UnknownLocation for an
  /// unknown location; InvalidArgument when since > until.
  std::vector<LocationScoreRecord> list_scores(Id location_id, Timestamp since, Timestamp until);
  /// Every score in [since, until), ascending.
  std::vector<LocationScoreRecord> scores_between(Timestamp since, Timestamp until);

  void ensure_user(const std::string& user_id);
  bool user_exists(const std::string& user_id);
  /// Cascades to the profile and favourites. Unknown when absent.
  void delete_user(const std::string& user_id);

  /// Last write wins. Rejects weights outside the bounded simplex.
  UserProfileRecord save_profile(const std::string& user_id, const scoring::WeightVector& weights,
                                 bool traffic_sensitive, Purpose purpose);
  /// Defaults when the user has no stored profile.
  UserProfileRecord load_profile(const std::string& user_id);
  std::vector<UserProfileRecord> list_profiles();

  /// Duplicate when already saved; Unknown when the user or location is absent.
  FavouriteRecord add_favourite(const std::string& user_id, Id location_id);
  /// Unknown when not saved.
  void remove_favourite(const std::string& user_id, Id location_id);
  std::vector<FavouriteRecord> list_favourites(const std::string& user_id);

  std::size_t pending_scores() const;
  /// Current migration version of the underlying schema.
  int schema_version();

 protected:
  Store(std::shared_ptr<const Clock> clock, BatchPolicy batch);

  /// Starts the flush timer; call at the end of the derived constructor.
  void start();
  /// Stops the timer and flushes; call at the start of the derived destructor.
  void close();

  const Clock& clock() const { return *clock_; }

  virtual std::optional<LocationRecord> do_find_location_at(long long lat_e6, long long lon_e6) = 0;
  virtual LocationRecord do_insert_location(const LocationRecord& record) = 0;
  virtual std::optional<LocationRecord> do_find_location(Id id) = 0;
  virtual std::vector<LocationRecord> do_list_locations() = 0;
  virtual void do_delete_location(Id id) = 0;
  virtual Id do_max_score_id() = 0;
  /// Records whose location no longer exists are dropped.
  virtual void do_append_scores(const std::vector<LocationScoreRecord>& records) = 0;
  virtual std::vector<LocationScoreRecord> do_list_scores(std::optional<Id> location_id, Timestamp since,
                                                          Timestamp until) = 0;
  virtual bool do_user_exists(const std::string& user_id) = 0;
  virtual void do_insert_user(const std::string& user_id, Timestamp at) = 0;
  virtual void do_delete_user(const std::string& user_id) = 0;
  virtual void do_put_profile(const UserProfileRecord& record) = 0;
  virtual std::optional<UserProfileRecord> do_get_profile(const std::string& user_id) = 0;
  virtual std::vector<UserProfileRecord> do_list_profiles() = 0;
  virtual std::optional<FavouriteRecord> do_find_favourite(const std::string& user_id, Id location_id) = 0;
  virtual FavouriteRecord do_insert_favourite(const FavouriteRecord& record) = 0;
  virtual void do_delete_favourite(const std::string& user_id, Id location_id) = 0;
  virtual std::vector<FavouriteRecord> do_list_favourites(const std::string& user_id) = 0;
  virtual int do_schema_version() = 0;

 private:
  void flush_locked_buffer(std::unique_lock<std::mutex>& buffer_lock);
  void flusher_loop();

  std::shared_ptr<const Clock> clock_;
  BatchPolicy batch_;

  std::mutex io_mu_;  // serialises backend hooks

  mutable std::mutex buf_mu_;
  std::vector<LocationScoreRecord> buffer_;
  std::optional<Id> last_score_id_;
  Timestamp last_evaluated_at_{};

  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  bool stopping_ = false;
  std::thread flusher_;
};

/// Throws InvalidArgument unless every weight is in [0.05, 0.40] and the sum
/// is 1 within 1e-9.
void validate_stored_weights(const scoring::WeightVector& w);

/// Append-only JSON-lines journal in a single file. Each line is one atomic
/// transaction; a torn final line from an interrupted write is discarded on
/// open. Path ":memory:" keeps everything in memory.
std::unique_ptr<Store> open_file_store(const std::string& path, std::shared_ptr<const Clock> clock,
                                       BatchPolicy batch = {});

/// SQLite database with foreign keys and ON DELETE CASCADE. Path ":memory:"
/// opens a private in-memory database.
std::unique_ptr<Store> open_sqlite_store(const std::string& path, std::shared_ptr<const Clock> clock,
                                         BatchPolicy batch = {});

/// `storage.backend` = file | sqlite, `storage.path`, `storage.flush_interval_ms`,
/// `storage.batch_size`.
std::unique_ptr<Store> make_store(const Config& cfg, std::shared_ptr<const Clock> clock);

}  // namespace urbanscore::persistence
