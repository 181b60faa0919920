#include <sqlite3.h>

#include <filesystem>
#include <utility>

#include "urbanscore/error.hpp"
#include "urbanscore/persistence/store.hpp"

namespace urbanscore::persistence {
namespace {

struct Migration {
  int version;
  const char* name;
  const char* sql;
};

constexpr Migration kMigrations[] = {
    {1, "initial", R"sql(
CREATE TABLE locations (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  lat_e6 INTEGER NOT NULL,
  lon_e6 INTEGER NOT NULL,
  lat REAL NOT NULL,
  lon REAL NOT NULL,
  display_name TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  UNIQUE (lat_e6, lon_e6)
);
CREATE TABLE location_scores (
  id INTEGER PRIMARY KEY,
  location_id INTEGER NOT NULL REFERENCES locations(id) ON DELETE CASCADE,
  air REAL NOT NULL,
  traffic REAL NOT NULL,
  lifestyle REAL NOT NULL,
  education REAL NOT NULL,
  metro REAL NOT NULL,
  surface REAL NOT NULL,
  aggregate INTEGER NOT NULL CHECK (aggregate BETWEEN 0 AND 100),
  profile_hash TEXT NOT NULL,
  evaluated_at INTEGER NOT NULL
);
CREATE INDEX location_scores_by_time ON location_scores(location_id, evaluated_at, id);
CREATE INDEX location_scores_time ON location_scores(evaluated_at, id);
CREATE TABLE users (
  user_id TEXT PRIMARY KEY,
  created_at INTEGER NOT NULL
);
CREATE TABLE user_profiles (
  user_id TEXT PRIMARY KEY REFERENCES users(user_id) ON DELETE CASCADE,
  w_air REAL NOT NULL,
  w_traffic REAL NOT NULL,
  w_lifestyle REAL NOT NULL,
  w_education REAL NOT NULL,
  w_metro REAL NOT NULL,
  w_surface REAL NOT NULL,
  traffic_sensitive INTEGER NOT NULL,
  purpose TEXT NOT NULL,
  updated_at INTEGER NOT NULL
);
CREATE TABLE favourites (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  user_id TEXT NOT NULL REFERENCES users(user_id) ON DELETE CASCADE,
  location_id INTEGER NOT NULL REFERENCES locations(id) ON DELETE CASCADE,
  saved_at INTEGER NOT NULL,
  UNIQUE (user_id, location_id)
);
)sql"},
    {2, "location_district", R"sql(
ALTER TABLE locations ADD COLUMN district TEXT NOT NULL DEFAULT '';
)sql"},
};

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
      fail(ErrorCode::StorageUnavailable, std::string("prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Statement& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
  Statement& bind(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Statement& bind(int i, const std::string& v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(ErrorCode::StorageUnavailable, std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  double f64(int col) const { return sqlite3_column_double(stmt_, col); }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string{};
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(ErrorCode::StorageUnavailable, std::string("bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

constexpr const char* kLocationColumns = "id, lat, lon, display_name, district, created_at";
constexpr const char* kScoreColumns =
    "id, location_id, air, traffic, lifestyle, education, metro, surface, aggregate, profile_hash, evaluated_at";
constexpr const char* kProfileColumns =
    "user_id, w_air, w_traffic, w_lifestyle, w_education, w_metro, w_surface, traffic_sensitive, purpose, "
    "updated_at";

LocationRecord location_row(const Statement& s) {
  return {s.i64(0), GeoPoint{s.f64(1), s.f64(2)}, s.text(3), s.text(4), from_micros(s.i64(5))};
}

LocationScoreRecord score_row(const Statement& s) {
  LocationScoreRecord r;
  r.id = s.i64(0);
  r.location_id = s.i64(1);
  r.sub_scores = scoring::SubScores{s.f64(2), s.f64(3), s.f64(4), s.f64(5), s.f64(6), s.f64(7)};
  r.aggregate = static_cast<int>(s.i64(8));
  r.profile_hash = s.text(9);
  r.evaluated_at = from_micros(s.i64(10));
  return r;
}

UserProfileRecord profile_row(const Statement& s) {
  UserProfileRecord r;
  r.user_id = s.text(0);
  for (int i = 0; i < 6; ++i) r.weights[static_cast<std::size_t>(i)] = s.f64(1 + i);
  r.traffic_sensitive = s.i64(7) != 0;
  r.declared_purpose = purpose_from_string(s.text(8)).value_or(Purpose::Residence);
  r.updated_at = from_micros(s.i64(9));
  return r;
}

FavouriteRecord favourite_row(const Statement& s) {
  return {s.i64(0), s.text(1), s.i64(2), from_micros(s.i64(3))};
}

class SqliteStore final : public Store {
 public:
  SqliteStore(const std::string& path, std::shared_ptr<const Clock> clock, BatchPolicy batch)
      : Store(std::move(clock), batch) {
    if (path != ":memory:") {
      const std::filesystem::path p(path);
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    }
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      db_ = nullptr;
      fail(ErrorCode::StorageUnavailable, "cannot open " + path + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:") exec("PRAGMA journal_mode = WAL");
    migrate();
    start();
  }

  ~SqliteStore() override {
    close();
    sqlite3_close(db_);
  }

 protected:
  std::optional<LocationRecord> do_find_location_at(long long lat_e6, long long lon_e6) override {
    Statement s(db_, sql("SELECT ", kLocationColumns, " FROM locations WHERE lat_e6 = ? AND lon_e6 = ?").c_str());
    s.bind(1, static_cast<std::int64_t>(lat_e6)).bind(2, static_cast<std::int64_t>(lon_e6));
    if (s.step()) return location_row(s);
    return std::nullopt;
  }

  LocationRecord do_insert_location(const LocationRecord& record) override {
    Statement s(db_,
                "INSERT INTO locations (lat_e6, lon_e6, lat, lon, display_name, district, created_at) "
                "VALUES (?, ?, ?, ?, ?, ?, ?)");
    s.bind(1, static_cast<std::int64_t>(micro_degrees(record.point.lat)))
        .bind(2, static_cast<std::int64_t>(micro_degrees(record.point.lon)))
        .bind(3, record.point.lat)
        .bind(4, record.point.lon)
        .bind(5, record.display_name)
        .bind(6, record.district)
        .bind(7, to_micros(record.created_at));
    s.run();
    LocationRecord rec = record;
    rec.id = sqlite3_last_insert_rowid(db_);
    return rec;
  }

  std::optional<LocationRecord> do_find_location(Id id) override {
    Statement s(db_, sql("SELECT ", kLocationColumns, " FROM locations WHERE id = ?").c_str());
    s.bind(1, id);
    if (s.step()) return location_row(s);
    return std::nullopt;
  }

  std::vector<LocationRecord> do_list_locations() override {
    Statement s(db_, sql("SELECT ", kLocationColumns, " FROM locations ORDER BY id").c_str());
    std::vector<LocationRecord> out;
    while (s.step()) out.push_back(location_row(s));
    return out;
  }

  void do_delete_location(Id id) override {
    Statement s(db_, "DELETE FROM locations WHERE id = ?");
    s.bind(1, id);
    s.run();
  }

  Id do_max_score_id() override {
    Statement s(db_, "SELECT COALESCE(MAX(id), 0) FROM location_scores");
    s.step();
    return s.i64(0);
  }

  void do_append_scores(const std::vector<LocationScoreRecord>& records) override {
    Transaction tx(*this);
    Statement s(db_,
                "INSERT INTO location_scores (id, location_id, air, traffic, lifestyle, education, metro, surface, "
                "aggregate, profile_hash, evaluated_at) "
                "SELECT ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ? WHERE EXISTS (SELECT 1 FROM locations WHERE id = ?)");
    for (const auto& r : records) {
      const auto& sub = r.sub_scores;
      s.bind(1, r.id)
          .bind(2, r.location_id)
          .bind(3, sub.air)
          .bind(4, sub.traffic)
          .bind(5, sub.lifestyle)
          .bind(6, sub.education)
          .bind(7, sub.metro)
          .bind(8, sub.surface)
          .bind(9, r.aggregate)
          .bind(10, r.profile_hash)
          .bind(11, to_micros(r.evaluated_at))
          .bind(12, r.location_id);
      s.run();
      s.reset();
    }
    tx.commit();
  }

  std::vector<LocationScoreRecord> do_list_scores(std::optional<Id> location_id, Timestamp since,
                                                  Timestamp until) override {
    std::vector<LocationScoreRecord> out;
    if (location_id) {
      Statement s(db_, sql("SELECT ", kScoreColumns,
                           " FROM location_scores WHERE location_id = ? AND evaluated_at >= ? AND evaluated_at < ? "
                           "ORDER BY evaluated_at, id")
                           .c_str());
      s.bind(1, *location_id).bind(2, to_micros(since)).bind(3, to_micros(until));
      while (s.step()) out.push_back(score_row(s));
    } else {
      Statement s(db_, sql("SELECT ", kScoreColumns,
                           " FROM location_scores WHERE evaluated_at >= ? AND evaluated_at < ? "
                           "ORDER BY evaluated_at, id")
                           .c_str());
      s.bind(1, to_micros(since)).bind(2, to_micros(until));
      while (s.step()) out.push_back(score_row(s));
    }
    return out;
  }

  bool do_user_exists(const std::string& user_id) override {
    Statement s(db_, "SELECT 1 FROM users WHERE user_id = ?");
    s.bind(1, user_id);
    return s.step();
  }

  void do_insert_user(const std::string& user_id, Timestamp at) override {
    Statement s(db_, "INSERT INTO users (user_id, created_at) VALUES (?, ?)");
    s.bind(1, user_id).bind(2, to_micros(at));
    s.run();
  }

  void do_delete_user(const std::string& user_id) override {
    Statement s(db_, "DELETE FROM users WHERE user_id = ?");
    s.bind(1, user_id);
    s.run();
  }

  void do_put_profile(const UserProfileRecord& r) override {
    Statement s(db_, sql("INSERT OR REPLACE INTO user_profiles (", kProfileColumns,
                         ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)")
                         .c_str());
    s.bind(1, r.user_id);
    for (int i = 0; i < 6; ++i) s.bind(2 + i, r.weights[static_cast<std::size_t>(i)]);
    s.bind(8, r.traffic_sensitive ? 1 : 0)
        .bind(9, std::string(to_string(r.declared_purpose)))
        .bind(10, to_micros(r.updated_at));
    s.run();
  }

  std::optional<UserProfileRecord> do_get_profile(const std::string& user_id) override {
    Statement s(db_, sql("SELECT ", kProfileColumns, " FROM user_profiles WHERE user_id = ?").c_str());
    s.bind(1, user_id);
    if (s.step()) return profile_row(s);
    return std::nullopt;
  }

  std::vector<UserProfileRecord> do_list_profiles() override {
    Statement s(db_, sql("SELECT ", kProfileColumns, " FROM user_profiles ORDER BY user_id").c_str());
    std::vector<UserProfileRecord> out;
    while (s.step()) out.push_back(profile_row(s));
    return out;
  }

  std::optional<FavouriteRecord> do_find_favourite(const std::string& user_id, Id location_id) override {
    Statement s(db_,
                "SELECT id, user_id, location_id, saved_at FROM favourites WHERE user_id = ? AND location_id = ?");
    s.bind(1, user_id).bind(2, location_id);
    if (s.step()) return favourite_row(s);
    return std::nullopt;
  }

  FavouriteRecord do_insert_favourite(const FavouriteRecord& record) override {
    Statement s(db_, "INSERT INTO favourites (user_id, location_id, saved_at) VALUES (?, ?, ?)");
    s.bind(1, record.user_id).bind(2, record.location_id).bind(3, to_micros(record.saved_at));
    s.run();
    FavouriteRecord rec = record;
    rec.id = sqlite3_last_insert_rowid(db_);
    return rec;
  }

  void do_delete_favourite(const std::string& user_id, Id location_id) override {
    Statement s(db_, "DELETE FROM favourites WHERE user_id = ? AND location_id = ?");
    s.bind(1, user_id).bind(2, location_id);
    s.run();
  }

  std::vector<FavouriteRecord> do_list_favourites(const std::string& user_id) override {
    Statement s(db_,
                "SELECT id, user_id, location_id, saved_at FROM favourites WHERE user_id = ? "
                "ORDER BY saved_at, id");
    s.bind(1, user_id);
    std::vector<FavouriteRecord> out;
    while (s.step()) out.push_back(favourite_row(s));
    return out;
  }

  int do_schema_version() override {
    Statement s(db_, "SELECT COALESCE(MAX(version), 0) FROM schema_migrations");
    s.step();
    return static_cast<int>(s.i64(0));
  }

 private:
  class Transaction {
   public:
    explicit Transaction(SqliteStore& store) : store_(store) { store_.exec("BEGIN IMMEDIATE"); }
    ~Transaction() {
      if (!done_) sqlite3_exec(store_.db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
      store_.exec("COMMIT");
      done_ = true;
    }

   private:
    SqliteStore& store_;
    bool done_ = false;
  };

  template <class... Parts>
  static std::string sql(const Parts&... parts) {
    std::string out;
    (out.append(parts), ...);
    return out;
  }

  void exec(const std::string& statement) {
    char* err = nullptr;
    if (sqlite3_exec(db_, statement.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      fail(ErrorCode::StorageUnavailable, "sqlite: " + msg);
    }
  }

  void migrate() {
    exec(
        "CREATE TABLE IF NOT EXISTS schema_migrations ("
        "version INTEGER PRIMARY KEY, name TEXT NOT NULL, applied_at INTEGER NOT NULL)");
    const int current = do_schema_version();
    for (const auto& m : kMigrations) {
      if (m.version <= current) continue;
      Transaction tx(*this);
      exec(m.sql);
      Statement s(db_, "INSERT INTO schema_migrations (version, name, applied_at) VALUES (?, ?, ?)");
      s.bind(1, m.version).bind(2, std::string(m.name)).bind(3, to_micros(clock().now()));
      s.run();
      tx.commit();
    }
  }

  sqlite3* db_ = nullptr;
};

}  // namespace

std::unique_ptr<Store> open_sqlite_store(const std::string& path, std::shared_ptr<const Clock> clock,
                                         BatchPolicy batch) {
  return std::make_unique<SqliteStore>(path, std::move(clock), batch);
}

}  // namespace urbanscore::persistence
