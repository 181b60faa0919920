#include <fcntl.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "urbanscore/error.hpp"
#include "urbanscore/persistence/store.hpp"

namespace urbanscore::persistence {
namespace {

using nlohmann::json;

// Journal layout, one JSON document per line:
//   {"format": "urbanscore-journal"}                       header
//   {"migration": N, "name": ..., "applied_at": µs}        migration ledger
//   {"tx": [op, ...]}                                      one transaction
struct Migration {
  int version;
  const char* name;
};
constexpr Migration kMigrations[] = {
    {1, "initial"},
    {2, "location_district"},
};
constexpr int kSchemaVersion = 2;
constexpr const char* kFormat = "urbanscore-journal";

json weights_json(const scoring::WeightVector& w) { return json(std::vector<double>(w.begin(), w.end())); }

scoring::WeightVector weights_from(const json& j) {
  scoring::WeightVector w{};
  if (!j.is_array() || j.size() != w.size()) fail(ErrorCode::StorageUnavailable, "journal: bad weight vector");
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = j[i].get<double>();
  return w;
}

class FileStore final : public Store {
 public:
  FileStore(std::string path, std::shared_ptr<const Clock> clock, BatchPolicy batch)
      : Store(std::move(clock), batch), path_(std::move(path)) {
    if (path_ != ":memory:") open_journal();
    else schema_version_ = kSchemaVersion;
    start();
  }

  ~FileStore() override {
    close();
    if (fd_ >= 0) ::close(fd_);
  }

 protected:
  std::optional<LocationRecord> do_find_location_at(long long lat_e6, long long lon_e6) override {
    auto it = location_index_.find({lat_e6, lon_e6});
    if (it == location_index_.end()) return std::nullopt;
    return locations_.at(it->second);
  }

  LocationRecord do_insert_location(const LocationRecord& record) override {
    LocationRecord rec = record;
    rec.id = next_location_id_;
    commit({{{"op", "loc"},
             {"id", rec.id},
             {"lat", rec.point.lat},
             {"lon", rec.point.lon},
             {"name", rec.display_name},
             {"district", rec.district},
             {"at", to_micros(rec.created_at)}}});
    return rec;
  }

  std::optional<LocationRecord> do_find_location(Id id) override {
    auto it = locations_.find(id);
    if (it == locations_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<LocationRecord> do_list_locations() override {
    std::vector<LocationRecord> out;
    for (const auto& [_, rec] : locations_) out.push_back(rec);
    return out;
  }

  void do_delete_location(Id id) override { commit({{{"op", "del_loc"}, {"id", id}}}); }

  Id do_max_score_id() override { return max_score_id_; }

  void do_append_scores(const std::vector<LocationScoreRecord>& records) override {
    json ops = json::array();
    for (const auto& r : records) {
      if (!locations_.contains(r.location_id)) continue;
      const auto s = r.sub_scores.as_array();
      ops.push_back({{"op", "score"},
                     {"id", r.id},
                     {"loc", r.location_id},
                     {"s", std::vector<double>(s.begin(), s.end())},
                     {"agg", r.aggregate},
                     {"ph", r.profile_hash},
                     {"at", to_micros(r.evaluated_at)}});
    }
    if (!ops.empty()) commit(ops);
  }

  std::vector<LocationScoreRecord> do_list_scores(std::optional<Id> location_id, Timestamp since,
                                                  Timestamp until) override {
    std::vector<LocationScoreRecord> out;
    auto collect = [&](const std::vector<LocationScoreRecord>& v) {
      for (const auto& r : v)
        if (r.evaluated_at >= since && r.evaluated_at < until) out.push_back(r);
    };
    if (location_id) {
      auto it = scores_.find(*location_id);
      if (it != scores_.end()) collect(it->second);
    } else {
      for (const auto& [_, v] : scores_) collect(v);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::pair(a.evaluated_at, a.id) < std::pair(b.evaluated_at, b.id);
    });
    return out;
  }

  bool do_user_exists(const std::string& user_id) override { return users_.contains(user_id); }

  void do_insert_user(const std::string& user_id, Timestamp at) override {
    commit({{{"op", "user"}, {"id", user_id}, {"at", to_micros(at)}}});
  }

  void do_delete_user(const std::string& user_id) override { commit({{{"op", "del_user"}, {"id", user_id}}}); }

  void do_put_profile(const UserProfileRecord& r) override {
    commit({{{"op", "profile"},
             {"user", r.user_id},
             {"w", weights_json(r.weights)},
             {"traffic_sensitive", r.traffic_sensitive},
             {"purpose", std::string(to_string(r.declared_purpose))},
             {"at", to_micros(r.updated_at)}}});
  }

  std::optional<UserProfileRecord> do_get_profile(const std::string& user_id) override {
    auto it = profiles_.find(user_id);
    if (it == profiles_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<UserProfileRecord> do_list_profiles() override {
    std::vector<UserProfileRecord> out;
    for (const auto& [_, p] : profiles_) out.push_back(p);
    return out;
  }

  std::optional<FavouriteRecord> do_find_favourite(const std::string& user_id, Id location_id) override {
    for (const auto& [_, f] : favourites_)
      if (f.user_id == user_id && f.location_id == location_id) return f;
    return std::nullopt;
  }

  FavouriteRecord do_insert_favourite(const FavouriteRecord& record) override {
    FavouriteRecord rec = record;
    rec.id = next_favourite_id_;
    commit({{{"op", "fav"},
             {"id", rec.id},
             {"user", rec.user_id},
             {"loc", rec.location_id},
             {"at", to_micros(rec.saved_at)}}});
    return rec;
  }

  void do_delete_favourite(const std::string& user_id, Id location_id) override {
    commit({{{"op", "unfav"}, {"user", user_id}, {"loc", location_id}}});
  }

  std::vector<FavouriteRecord> do_list_favourites(const std::string& user_id) override {
    std::vector<FavouriteRecord> out;
    for (const auto& [_, f] : favourites_)
      if (f.user_id == user_id) out.push_back(f);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::pair(a.saved_at, a.id) < std::pair(b.saved_at, b.id);
    });
    return out;
  }

  int do_schema_version() override { return schema_version_; }

 private:
  // Writes the transaction durably, then applies it to memory.
  void commit(const json& ops) {
    if (fd_ >= 0) write_line(json{{"tx", ops}}.dump());
    for (const auto& op : ops) apply(op);
  }

  void write_line(std::string line) {
    line.push_back('\n');
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      const ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(ErrorCode::StorageUnavailable, std::string("journal write failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0)
      fail(ErrorCode::StorageUnavailable, std::string("journal sync failed: ") + std::strerror(errno));
  }

  void apply(const json& op) {
    const std::string kind = op.at("op").get<std::string>();
    if (kind == "loc") {
      LocationRecord r;
      r.id = op.at("id").get<Id>();
      r.point = GeoPoint{op.at("lat").get<double>(), op.at("lon").get<double>()};
      r.display_name = op.at("name").get<std::string>();
      r.district = op.value("district", std::string{});
      r.created_at = from_micros(op.at("at").get<std::int64_t>());
      location_index_[{micro_degrees(r.point.lat), micro_degrees(r.point.lon)}] = r.id;
      locations_[r.id] = r;
      next_location_id_ = std::max(next_location_id_, r.id + 1);
    } else if (kind == "del_loc") {
      const Id id = op.at("id").get<Id>();
      auto it = locations_.find(id);
      if (it == locations_.end()) return;
      location_index_.erase({micro_degrees(it->second.point.lat), micro_degrees(it->second.point.lon)});
      locations_.erase(it);
      scores_.erase(id);
      std::erase_if(favourites_, [&](const auto& kv) { return kv.second.location_id == id; });
    } else if (kind == "score") {
      LocationScoreRecord r;
      r.id = op.at("id").get<Id>();
      r.location_id = op.at("loc").get<Id>();
      const auto s = op.at("s").get<std::vector<double>>();
      if (s.size() != scoring::kComponentCount) fail(ErrorCode::StorageUnavailable, "journal: bad score");
      std::array<double, scoring::kComponentCount> a{};
      std::copy(s.begin(), s.end(), a.begin());
      r.sub_scores = scoring::SubScores::from_array(a);
      r.aggregate = op.at("agg").get<int>();
      r.profile_hash = op.at("ph").get<std::string>();
      r.evaluated_at = from_micros(op.at("at").get<std::int64_t>());
      max_score_id_ = std::max(max_score_id_, r.id);
      if (locations_.contains(r.location_id)) scores_[r.location_id].push_back(r);
    } else if (kind == "user") {
      users_.insert(op.at("id").get<std::string>());
    } else if (kind == "del_user") {
      const std::string id = op.at("id").get<std::string>();
      users_.erase(id);
      profiles_.erase(id);
      std::erase_if(favourites_, [&](const auto& kv) { return kv.second.user_id == id; });
    } else if (kind == "profile") {
      UserProfileRecord r;
      r.user_id = op.at("user").get<std::string>();
      r.weights = weights_from(op.at("w"));
      r.traffic_sensitive = op.at("traffic_sensitive").get<bool>();
      r.declared_purpose =
          purpose_from_string(op.at("purpose").get<std::string>()).value_or(Purpose::Residence);
      r.updated_at = from_micros(op.at("at").get<std::int64_t>());
      profiles_[r.user_id] = r;
    } else if (kind == "fav") {
      FavouriteRecord r;
      r.id = op.at("id").get<Id>();
      r.user_id = op.at("user").get<std::string>();
      r.location_id = op.at("loc").get<Id>();
      r.saved_at = from_micros(op.at("at").get<std::int64_t>());
      favourites_[r.id] = r;
      next_favourite_id_ = std::max(next_favourite_id_, r.id + 1);
    } else if (kind == "unfav") {
      const std::string user = op.at("user").get<std::string>();
      const Id loc = op.at("loc").get<Id>();
      std::erase_if(favourites_,
                    [&](const auto& kv) { return kv.second.user_id == user && kv.second.location_id == loc; });
    } else {
      fail(ErrorCode::StorageUnavailable, "journal: unknown operation " + kind);
    }
  }

  void open_journal() {
    namespace fs = std::filesystem;
    const fs::path p(path_);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());

    std::vector<std::string> lines;
    std::vector<std::size_t> ends;  // byte offset after each complete line
    bool torn_tail = false;
    {
      std::ifstream in(p, std::ios::binary);
      if (in) {
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::size_t pos = 0;
        while (pos < content.size()) {
          const auto nl = content.find('\n', pos);
          if (nl == std::string::npos) {
            torn_tail = true;
            break;
          }
          lines.push_back(content.substr(pos, nl - pos));
          ends.push_back(nl + 1);
          pos = nl + 1;
        }
      }
    }

    std::size_t good_end = 0;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      json doc;
      try {
        doc = json::parse(lines[i]);
      } catch (const json::parse_error&) {
        if (i + 1 == lines.size()) {
          torn_tail = true;
          break;
        }
        fail(ErrorCode::StorageUnavailable, "journal corrupt at line " + std::to_string(i + 1));
      }
      if (!header_seen) {
        if (doc.value("format", std::string{}) != kFormat)
          fail(ErrorCode::StorageUnavailable, path_ + " is not an urbanscore journal");
        header_seen = true;
      } else if (doc.contains("migration")) {
        const int v = doc.at("migration").get<int>();
        if (v != schema_version_ + 1)
          fail(ErrorCode::StorageUnavailable, "journal migration ledger out of order");
        schema_version_ = v;
      } else if (doc.contains("tx")) {
        for (const auto& op : doc.at("tx")) apply(op);
      } else {
        fail(ErrorCode::StorageUnavailable, "journal: unrecognised line " + std::to_string(i + 1));
      }
      good_end = ends[i];
    }
    if (schema_version_ > kSchemaVersion)
      fail(ErrorCode::StorageUnavailable, "journal schema is newer than this build");

    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorCode::StorageUnavailable, "cannot open " + path_ + ": " + std::strerror(errno));
    if (torn_tail) {
      spdlog::warn("discarding torn final transaction in {}", path_);
      if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0)
        fail(ErrorCode::StorageUnavailable, std::string("cannot truncate journal: ") + std::strerror(errno));
    }
    if (!header_seen) write_line(json{{"format", kFormat}}.dump());
    for (const auto& m : kMigrations) {
      if (m.version <= schema_version_) continue;
      // Journal entries are self-describing; older transactions stay readable
      // because new fields have defaults at replay.
      write_line(json{{"migration", m.version}, {"name", m.name}, {"applied_at", to_micros(clock().now())}}.dump());
      schema_version_ = m.version;
    }
  }

  std::string path_;
  int fd_ = -1;
  int schema_version_ = 0;

  std::map<Id, LocationRecord> locations_;
  std::map<std::pair<long long, long long>, Id> location_index_;
  std::map<Id, std::vector<LocationScoreRecord>> scores_;
  std::set<std::string> users_;
  std::map<std::string, UserProfileRecord> profiles_;
  std::map<Id, FavouriteRecord> favourites_;
  Id next_location_id_ = 1;
  Id next_favourite_id_ = 1;
  Id max_score_id_ = 0;
};

}  // namespace

std::unique_ptr<Store> open_file_store(const std::string& path, std::shared_ptr<const Clock> clock,
                                       BatchPolicy batch) {
  return std::make_unique<FileStore>(path, std::move(clock), batch);
}

}  // namespace urbanscore::persistence
