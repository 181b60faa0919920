#include "urbanscore/persistence/store.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"

namespace urbanscore::persistence {

std::string_view to_string(Purpose p) noexcept {
  switch (p) {
    case Purpose::Residence: return "residence";
    case Purpose::Investment: return "investment";
    case Purpose::ShortTerm: return "short_term";
  }
  return "unknown";
}

std::optional<Purpose> purpose_from_string(std::string_view s) noexcept {
  for (Purpose p : kAllPurposes)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

void validate_stored_weights(const scoring::WeightVector& w) {
  double sum = 0.0;
  for (double x : w) {
    require(std::isfinite(x), "weights must be finite");
    require(x >= scoring::kMinWeight - 1e-12 && x <= scoring::kMaxWeight + 1e-12,
            "every weight must be within [0.05, 0.40]");
    sum += x;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "weights must sum to 1");
}

Store::Store(std::shared_ptr<const Clock> clock, BatchPolicy batch) : clock_(std::move(clock)), batch_(batch) {
  require(clock_ != nullptr, "store needs a clock");
  require(batch_.batch_size >= 1, "storage.batch_size must be >= 1");
  require(batch_.flush_interval.count() > 0, "storage.flush_interval_ms must be positive");
}

Store::~Store() {
  if (flusher_.joinable()) {
    // Derived destructor did not call close(); the hooks are gone, so only stop.
    {
      std::lock_guard lock(timer_mu_);
      stopping_ = true;
    }
    timer_cv_.notify_all();
    flusher_.join();
  }
}

void Store::start() { flusher_ = std::thread([this] { flusher_loop(); }); }

void Store::close() {
  {
    std::lock_guard lock(timer_mu_);
    stopping_ = true;
  }
  timer_cv_.notify_all();
  if (flusher_.joinable()) flusher_.join();
  try {
    flush();
  } catch (const std::exception& e) {
    spdlog::error("final score flush failed: {}", e.what());
  }
}

void Store::flusher_loop() {
  std::unique_lock lock(timer_mu_);
  while (!stopping_) {
    timer_cv_.wait_for(lock, batch_.flush_interval, [this] { return stopping_; });
    if (stopping_) break;
    lock.unlock();
    try {
      flush();
    } catch (const std::exception& e) {
      spdlog::warn("periodic score flush failed: {}", e.what());
    }
    lock.lock();
  }
}

void Store::flush_locked_buffer(std::unique_lock<std::mutex>& buffer_lock) {
  std::vector<LocationScoreRecord> batch;
  batch.swap(buffer_);
  buffer_lock.unlock();
  if (batch.empty()) return;
  try {
    do_append_scores(batch);
  } catch (...) {
    buffer_lock.lock();
    buffer_.insert(buffer_.begin(), batch.begin(), batch.end());
    buffer_lock.unlock();
    throw;
  }
}

void Store::flush() {
  std::lock_guard io(io_mu_);
  std::unique_lock buf(buf_mu_);
  flush_locked_buffer(buf);
}

std::size_t Store::pending_scores() const {
  std::lock_guard lock(buf_mu_);
  return buffer_.size();
}

int Store::schema_version() {
  std::lock_guard io(io_mu_);
  return do_schema_version();
}

// --- locations -------------------------------------------------------------

LocationRecord Store::upsert_location(const GeoPoint& point, const std::string& display_name,
                                      const std::string& district) {
  require(point.valid(), "location point out of range");
  std::lock_guard io(io_mu_);
  const long long lat = micro_degrees(point.lat);
  const long long lon = micro_degrees(point.lon);
  if (auto existing = do_find_location_at(lat, lon)) return *existing;
  LocationRecord rec;
  rec.point = point;
  rec.display_name = display_name;
  rec.district = district;
  rec.created_at = clock_->now();
  return do_insert_location(rec);
}

std::optional<LocationRecord> Store::find_location(Id id) {
  std::lock_guard io(io_mu_);
  return do_find_location(id);
}

std::vector<LocationRecord> Store::list_locations() {
  std::lock_guard io(io_mu_);
  return do_list_locations();
}

void Store::delete_location(Id id) {
  std::lock_guard io(io_mu_);
  std::unique_lock buf(buf_mu_);
  flush_locked_buffer(buf);
  if (!do_find_location(id)) fail(ErrorCode::UnknownLocation, "unknown location " + std::to_string(id));
  do_delete_location(id);
}

// --- scores ----------------------------------------------------------------

LocationScoreRecord Store::save_score(Id location_id, const scoring::SubScores& sub, int aggregate,
                                      const std::string& profile_hash) {
  require(sub.valid(), "sub-scores must be finite and within [0, 100]");
  require(aggregate >= 0 && aggregate <= 100, "aggregate must be within [0, 100]");
  std::lock_guard io(io_mu_);
  if (!do_find_location(location_id))
    fail(ErrorCode::UnknownLocation, "unknown location " + std::to_string(location_id));

  std::unique_lock buf(buf_mu_);
  if (!last_score_id_) last_score_id_ = do_max_score_id();
  LocationScoreRecord rec;
  rec.id = ++*last_score_id_;
  rec.location_id = location_id;
  rec.sub_scores = sub;
  rec.aggregate = aggregate;
  rec.profile_hash = profile_hash;
  rec.evaluated_at = std::max(clock_->now(), last_evaluated_at_);
  last_evaluated_at_ = rec.evaluated_at;
  buffer_.push_back(rec);
  if (buffer_.size() >= batch_.batch_size) flush_locked_buffer(buf);
  return rec;
}

std::vector<LocationScoreRecord> Store::list_scores(Id location_id, Timestamp since, Timestamp until) {
  require(since <= until, "since must not be after until");
  std::lock_guard io(io_mu_);
  std::unique_lock buf(buf_mu_);
  flush_locked_buffer(buf);
  if (!do_find_location(location_id))
    fail(ErrorCode::UnknownLocation, "unknown location " + std::to_string(location_id));
  return do_list_scores(location_id, since, until);
}

std::vector<LocationScoreRecord> Store::scores_between(Timestamp since, Timestamp until) {
  require(since <= until, "since must not be after until");
  std::lock_guard io(io_mu_);
  std::unique_lock buf(buf_mu_);
  flush_locked_buffer(buf);
  return do_list_scores(std::nullopt, since, until);
}

// --- users and profiles ----------------------------------------------------

void Store::ensure_user(const std::string& user_id) {
  require(!user_id.empty(), "user id must not be empty");
  std::lock_guard io(io_mu_);
  if (!do_user_exists(user_id)) do_insert_user(user_id, clock_->now());
}

bool Store::user_exists(const std::string& user_id) {
  std::lock_guard io(io_mu_);
  return do_user_exists(user_id);
}

void Store::delete_user(const std::string& user_id) {
  std::lock_guard io(io_mu_);
  if (!do_user_exists(user_id)) fail(ErrorCode::Unknown, "unknown user " + user_id);
  do_delete_user(user_id);
}

UserProfileRecord Store::save_profile(const std::string& user_id, const scoring::WeightVector& weights,
                                      bool traffic_sensitive, Purpose purpose) {
  require(!user_id.empty(), "user id must not be empty");
  validate_stored_weights(weights);
  std::lock_guard io(io_mu_);
  const Timestamp now = clock_->now();
  if (!do_user_exists(user_id)) do_insert_user(user_id, now);
  UserProfileRecord rec{user_id, weights, traffic_sensitive, purpose, now};
  do_put_profile(rec);
  return rec;
}

UserProfileRecord Store::load_profile(const std::string& user_id) {
  std::lock_guard io(io_mu_);
  if (auto rec = do_get_profile(user_id)) return *rec;
  UserProfileRecord rec;
  rec.user_id = user_id;
  rec.updated_at = clock_->now();
  return rec;
}

std::vector<UserProfileRecord> Store::list_profiles() {
  std::lock_guard io(io_mu_);
  return do_list_profiles();
}

// --- favourites ------------------------------------------------------------

FavouriteRecord Store::add_favourite(const std::string& user_id, Id location_id) {
  std::lock_guard io(io_mu_);
  if (!do_user_exists(user_id)) fail(ErrorCode::Unknown, "unknown user " + user_id);
  if (!do_find_location(location_id))
    fail(ErrorCode::Unknown, "unknown location " + std::to_string(location_id));
  if (do_find_favourite(user_id, location_id)) fail(ErrorCode::Duplicate, "favourite already saved");
  FavouriteRecord rec;
  rec.user_id = user_id;
  rec.location_id = location_id;
  rec.saved_at = clock_->now();
  return do_insert_favourite(rec);
}

void Store::remove_favourite(const std::string& user_id, Id location_id) {
  std::lock_guard io(io_mu_);
  if (!do_find_favourite(user_id, location_id)) fail(ErrorCode::Unknown, "favourite not saved");
  do_delete_favourite(user_id, location_id);
}

std::vector<FavouriteRecord> Store::list_favourites(const std::string& user_id) {
  std::lock_guard io(io_mu_);
  return do_list_favourites(user_id);
}

// --- factory ---------------------------------------------------------------

std::unique_ptr<Store> make_store(const Config& cfg, std::shared_ptr<const Clock> clock) {
  BatchPolicy batch;
  batch.flush_interval = std::chrono::milliseconds(cfg.get_int("storage.flush_interval_ms", 1000));
  const long long batch_size = cfg.get_int("storage.batch_size", 64);
  require(batch_size >= 1, "storage.batch_size must be >= 1");
  batch.batch_size = static_cast<std::size_t>(batch_size);
  const std::string backend = cfg.get_string("storage.backend", "file");
  const std::string path = cfg.get_string("storage.path", "urbanscore.db");
  if (backend == "file") return open_file_store(path, std::move(clock), batch);
  if (backend == "sqlite") return open_sqlite_store(path, std::move(clock), batch);
  fail(ErrorCode::InvalidArgument, "storage.backend must be file or sqlite");
}

}  // namespace urbanscore::persistence
