#include "urbanscore/geodata/providers.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/wire.hpp"

namespace urbanscore::geodata {

using nlohmann::json;

namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

json point_params(const GeoPoint& p) { return json{{"lat", p.lat}, {"lon", p.lon}}; }

[[noreturn]] void no_recording(std::string_view provider, std::string_view op, const json& params) {
  fail(ErrorCode::ProviderUnavailable,
       fmt::format("no {} recording for {} {}", provider, op, params.dump()));
}

}  // namespace

// --- contracts -------------------------------------------------------------

ResolvedAddress GeocodingProvider::forward(std::string_view query) {
  const std::string q = trimmed(query);
  if (q.empty()) fail(ErrorCode::NotFound, "empty address query");
  return do_forward(q);
}

ResolvedAddress GeocodingProvider::reverse(const GeoPoint& point) {
  require(point.valid(), "reverse geocoding point out of range");
  return do_reverse(point);
}

std::vector<Facility> FacilityProvider::fetch(const GeoPoint& center, double radius_m) {
  require(center.valid(), "facility query center out of range");
  require(std::isfinite(radius_m) && radius_m >= kMinRadiusM && radius_m <= kMaxRadiusM,
          fmt::format("radius {} m outside [{}, {}]", radius_m, kMinRadiusM, kMaxRadiusM));
  return do_fetch(center, radius_m);
}

TrafficSample TrafficProvider::fetch(const GeoPoint& point) {
  require(point.valid(), "traffic point out of range");
  return do_fetch(point);
}

std::vector<PollutantSeries> AirQualityProvider::fetch_history(const GeoPoint& point, int window_days) {
  require(point.valid(), "air quality point out of range");
  require(window_days >= 1 && window_days <= 365, "window_days must be within [1, 365]");
  return do_fetch_history(point, window_days);
}

// --- live ------------------------------------------------------------------

void check_status(const HttpResponse& response, std::string_view provider) {
  if (response.status >= 200 && response.status < 300) return;
  if (response.status >= 500 || response.status == 429)
    fail(ErrorCode::ProviderUnavailable, fmt::format("{}: HTTP {}", provider, response.status));
  fail(ErrorCode::MalformedResponse, fmt::format("{}: HTTP {}", provider, response.status));
}

LiveGeocodingProvider::LiveGeocodingProvider(std::shared_ptr<HttpTransport> transport, std::string base_url)
    : transport_(std::move(transport)), base_url_(std::move(base_url)) {}

ResolvedAddress LiveGeocodingProvider::do_forward(const std::string& query) {
  const auto res = transport_->send(wire::forward_geocode_request(base_url_, query));
  check_status(res, "geocode");
  return wire::parse_forward_geocode(wire::parse_body(res.body, "geocode"), query);
}

ResolvedAddress LiveGeocodingProvider::do_reverse(const GeoPoint& point) {
  const auto res = transport_->send(wire::reverse_geocode_request(base_url_, point));
  check_status(res, "geocode");
  return wire::parse_reverse_geocode(wire::parse_body(res.body, "geocode"), point);
}

LiveFacilityProvider::LiveFacilityProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                                           EducationRules rules)
    : transport_(std::move(transport)), base_url_(std::move(base_url)), rules_(std::move(rules)) {}

std::vector<Facility> LiveFacilityProvider::do_fetch(const GeoPoint& center, double radius_m) {
  const auto res = transport_->send(wire::facilities_request(base_url_, center, radius_m));
  check_status(res, "facilities");
  return wire::parse_facilities(wire::parse_body(res.body, "facilities"), center, radius_m, rules_);
}

LiveTrafficProvider::LiveTrafficProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                                         std::string api_key)
    : transport_(std::move(transport)), base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

TrafficSample LiveTrafficProvider::do_fetch(const GeoPoint& point) {
  const auto res = transport_->send(wire::traffic_request(base_url_, api_key_, point));
  // The flow API answers 400 with a detailed error when no segment is near.
  if (res.status == 400) return wire::parse_traffic(wire::parse_body(res.body, "traffic"), point);
  check_status(res, "traffic");
  return wire::parse_traffic(wire::parse_body(res.body, "traffic"), point);
}

LiveAirQualityProvider::LiveAirQualityProvider(std::shared_ptr<HttpTransport> transport, std::string base_url,
                                               std::string api_key, std::shared_ptr<const Clock> clock)
    : transport_(std::move(transport)),
      base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      clock_(std::move(clock)) {}

std::vector<PollutantSeries> LiveAirQualityProvider::do_fetch_history(const GeoPoint& point, int window_days) {
  const Timestamp end = clock_->now();
  const Timestamp start = end - std::chrono::hours(24 * window_days);
  const auto res = transport_->send(wire::air_history_request(base_url_, api_key_, point, start, end));
  check_status(res, "air");
  return wire::parse_air_history(wire::parse_body(res.body, "air"), window_days);
}

// --- fixtures --------------------------------------------------------------

std::shared_ptr<const FixtureStore> FixtureStore::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorCode::InvalidArgument, "fixture directory not found: " + dir.string());
  auto store = std::make_shared<FixtureStore>();
  for (const auto& provider_dir : fs::directory_iterator(dir)) {
    if (!provider_dir.is_directory()) continue;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(provider_dir.path())) {
      if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        fail(ErrorCode::MalformedResponse, fmt::format("fixture {}: {}", file.string(), e.what()));
      }
      if (!doc.is_object() || !doc.contains("request") || !doc.contains("response"))
        fail(ErrorCode::MalformedResponse, "fixture without request/response: " + file.string());
      const auto& req = doc["request"];
      FixtureRecord rec;
      rec.provider = provider_dir.path().filename().string();
      rec.op = req.value("op", std::string{});
      rec.params = req.value("params", json::object());
      rec.response = doc["response"];
      rec.recorded_at = doc.value("recorded_at", std::string{});
      rec.file = file;
      store->add(std::move(rec));
    }
  }
  return store;
}

void FixtureStore::add(FixtureRecord record) { records_.push_back(std::move(record)); }

bool FixtureStore::params_match(const json& recorded, const json& requested) {
  if (!recorded.is_object() || !requested.is_object()) return recorded == requested;
  if (recorded.size() != requested.size()) return false;
  for (const auto& [k, v] : recorded.items()) {
    auto it = requested.find(k);
    if (it == requested.end()) return false;
    if (v.is_number() && it->is_number()) {
      if (std::abs(v.get<double>() - it->get<double>()) > 1e-5) return false;
    } else if (v != *it) {
      return false;
    }
  }
  return true;
}

const FixtureRecord* FixtureStore::find(std::string_view provider, std::string_view op,
                                        const json& params) const {
  for (const auto& r : records_) {
    if (r.provider == provider && r.op == op && params_match(r.params, params)) return &r;
  }
  return nullptr;
}

std::vector<const FixtureRecord*> FixtureStore::all(std::string_view provider, std::string_view op) const {
  std::vector<const FixtureRecord*> out;
  for (const auto& r : records_) {
    if (r.provider == provider && r.op == op) out.push_back(&r);
  }
  return out;
}

FixtureGeocodingProvider::FixtureGeocodingProvider(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {}

ResolvedAddress FixtureGeocodingProvider::do_forward(const std::string& query) {
  const json params{{"q", query}};
  const auto* rec = store_->find("geocode", "forward", params);
  if (!rec) no_recording("geocode", "forward", params);
  return wire::parse_forward_geocode(rec->response, query);
}

ResolvedAddress FixtureGeocodingProvider::do_reverse(const GeoPoint& point) {
  const json params = point_params(point);
  const auto* rec = store_->find("geocode", "reverse", params);
  if (!rec) no_recording("geocode", "reverse", params);
  return wire::parse_reverse_geocode(rec->response, point);
}

FixtureFacilityProvider::FixtureFacilityProvider(std::shared_ptr<const FixtureStore> store, EducationRules rules)
    : store_(std::move(store)), rules_(std::move(rules)) {}

std::vector<Facility> FixtureFacilityProvider::do_fetch(const GeoPoint& center, double radius_m) {
  const FixtureRecord* best = nullptr;
  double best_radius = 0.0;
  for (const auto* rec : store_->all("facilities", "query")) {
    const auto& p = rec->params;
    if (!p.contains("lat") || !p.contains("lon") || !p.contains("radius_m")) continue;
    if (!FixtureStore::params_match(point_params(center), json{{"lat", p["lat"]}, {"lon", p["lon"]}}))
      continue;
    const double r = p["radius_m"].get<double>();
    if (r + 1e-9 < radius_m) continue;
    if (!best || r < best_radius) {
      best = rec;
      best_radius = r;
    }
  }
  if (!best) {
    no_recording("facilities", "query",
                 json{{"lat", center.lat}, {"lon", center.lon}, {"radius_m", radius_m}});
  }
  return wire::parse_facilities(best->response, center, radius_m, rules_);
}

FixtureTrafficProvider::FixtureTrafficProvider(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {}

TrafficSample FixtureTrafficProvider::do_fetch(const GeoPoint& point) {
  json params = point_params(point);
  params["zoom"] = wire::kTrafficZoom;
  const auto* rec = store_->find("traffic", "flow_segment", params);
  if (!rec) no_recording("traffic", "flow_segment", params);
  return wire::parse_traffic(rec->response, point);
}

FixtureAirQualityProvider::FixtureAirQualityProvider(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {}

std::vector<PollutantSeries> FixtureAirQualityProvider::do_fetch_history(const GeoPoint& point, int window_days) {
  json params = point_params(point);
  params["window_days"] = window_days;
  const auto* rec = store_->find("air", "history", params);
  if (!rec) no_recording("air", "history", params);
  return wire::parse_air_history(rec->response, window_days);
}

// --- factory ---------------------------------------------------------------

EducationRules education_rules_from(const Config& cfg) {
  EducationRules rules;
  if (auto list = cfg.get_list("geodata.highschool_keywords"); !list.empty())
    rules.highschool_keywords = std::move(list);
  return rules;
}

Providers make_providers(const Config& cfg, std::shared_ptr<const Clock> clock) {
  const std::string mode = cfg.get_string("providers.mode", "live");
  const EducationRules rules = education_rules_from(cfg);
  if (mode == "fixtures") {
    auto store = FixtureStore::load(cfg.get_string("providers.fixtures_dir"));
    return Providers{std::make_shared<FixtureGeocodingProvider>(store),
                     std::make_shared<FixtureFacilityProvider>(store, rules),
                     std::make_shared<FixtureTrafficProvider>(store),
                     std::make_shared<FixtureAirQualityProvider>(store)};
  }
  if (mode != "live") fail(ErrorCode::InvalidArgument, "providers.mode must be live or fixtures");
  auto transport = std::make_shared<HttplibTransport>(
      std::chrono::milliseconds(cfg.get_int("providers.timeout_ms", 5000)));
  return Providers{
      std::make_shared<LiveGeocodingProvider>(transport, cfg.get_string("providers.geocode.url")),
      std::make_shared<LiveFacilityProvider>(transport, cfg.get_string("providers.facilities.url"), rules),
      std::make_shared<LiveTrafficProvider>(transport, cfg.get_string("providers.traffic.url"),
                                            cfg.get_string("providers.traffic.key")),
      std::make_shared<LiveAirQualityProvider>(transport, cfg.get_string("providers.air.url"),
                                               cfg.get_string("providers.air.key"), std::move(clock))};
}

}  // namespace urbanscore::geodata
