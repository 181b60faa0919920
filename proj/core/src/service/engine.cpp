#include "urbanscore/service/engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <future>

#include <fmt/format.h>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/codec.hpp"
#include "urbanscore/geodata/facilities.hpp"

namespace urbanscore::service {

using geodata::Facility;
using geodata::PollutantSeries;
using geodata::ResolvedAddress;
using geodata::TrafficSample;
using nlohmann::json;

namespace {

using SteadyClock = std::chrono::steady_clock;

double ms_since(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
}

// Coordinates in cache keys are rounded to 6 dp so equal points share entries.
double key_coord(double deg) { return static_cast<double>(micro_degrees(deg)) / 1e6; }

std::string freshness_label(Freshness f) { return std::string(resilience::to_string(f)); }

template <class T>
struct FeedResult {
  std::optional<T> value;
  Freshness freshness = Freshness::Live;
  std::optional<ErrorCode> error;
  double ms = 0.0;
};

}  // namespace

void EvaluateRequest::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidRequest, msg); };
  if (address.has_value() == point.has_value()) bad("exactly one of address or point is required");
  if (address) {
    const auto first = address->find_first_not_of(" \t\r\n");
    if (first == std::string::npos) bad("address must not be empty");
  }
  if (point && !point->valid()) bad("point out of range");
  if (!std::isfinite(radius_m) || radius_m < geodata::kMinRadiusM || radius_m > geodata::kMaxRadiusM)
    bad(fmt::format("radius_m must be within [{}, {}]", geodata::kMinRadiusM, geodata::kMaxRadiusM));
  if (profile) {
    for (double w : profile->weights)
      if (!std::isfinite(w) || w <= 0.0) bad("profile weights must be positive");
  }
}

std::string district_of(const ResolvedAddress& address) {
  for (const char* key : {"suburb", "city_district", "city", "town", "village"}) {
    auto it = address.hierarchy.find(key);
    if (it != address.hierarchy.end() && !it->second.empty()) return it->second;
  }
  return {};
}

std::vector<explain::TopFacility> top_facilities(const std::vector<Facility>& facilities) {
  std::vector<const Facility*> named;
  for (const auto& f : facilities)
    if (!f.name.empty()) named.push_back(&f);
  std::stable_sort(named.begin(), named.end(),
                   [](const Facility* a, const Facility* b) { return a->distance_m < b->distance_m; });
  std::vector<explain::TopFacility> out;
  for (const Facility* f : named) {
    if (out.size() == explain::kMaxTopFacilities) break;
    out.push_back({f->name, f->category, f->distance_m});
  }
  return out;
}

Engine::Engine(EngineParts parts) : parts_(std::move(parts)) {
  require(parts_.providers.geocoding && parts_.providers.facilities && parts_.providers.traffic &&
              parts_.providers.air,
          "engine needs all four providers");
  require(parts_.gateway && parts_.store && parts_.explainer && parts_.clock, "engine is missing a component");
  parts_.calibration.validate();
  parts_.pollutants.validate();
}

scoring::PreferenceProfile Engine::profile_for(const std::optional<std::string>& user_id) {
  if (!user_id) return {};
  return parts_.store->load_profile(*user_id).profile();
}

ResolvedAddress Engine::resolve(const EvaluateRequest& request, ScoreReport& report) {
  auto& gw = *parts_.gateway;
  auto& geo = *parts_.providers.geocoding;
  if (request.address) {
    const json params{{"q", *request.address}};
    try {
      auto [addr, freshness] = gw.call<ResolvedAddress>(
          resilience::make_cache_key("geocode", "forward", params), Feed::Geocode,
          std::function<ResolvedAddress()>([&] { return geo.forward(*request.address); }));
      report.feed_status[Feed::Geocode] = freshness_label(freshness);
      if (freshness == Freshness::Stale) report.degraded.insert(Feed::Geocode);
      addr.source_query = *request.address;
      return addr;
    } catch (const Error& e) {
      fail(ErrorCode::GeocodeFailed, std::string("cannot resolve address: ") + e.what());
    }
  }
  const GeoPoint p = *request.point;
  const json params{{"lat", key_coord(p.lat)}, {"lon", key_coord(p.lon)}};
  try {
    auto [addr, freshness] = gw.call<ResolvedAddress>(
        resilience::make_cache_key("geocode", "reverse", params), Feed::Geocode,
        std::function<ResolvedAddress()>([&] { return geo.reverse(p); }));
    report.feed_status[Feed::Geocode] = freshness_label(freshness);
    if (freshness == Freshness::Stale) report.degraded.insert(Feed::Geocode);
    // Score the clicked point itself, not the snapped address.
    addr.point = p;
    return addr;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotFound) {
      ResolvedAddress bare;
      bare.point = p;
      bare.display_name = p.to_string();
      report.feed_status[Feed::Geocode] = "missing";
      return bare;
    }
    if (e.code() == ErrorCode::Unavailable) {
      ResolvedAddress bare;
      bare.point = p;
      bare.display_name = p.to_string();
      report.feed_status[Feed::Geocode] = "missing";
      report.degraded.insert(Feed::Geocode);
      return bare;
    }
    fail(ErrorCode::GeocodeFailed, std::string("cannot resolve point: ") + e.what());
  }
}

ScoreReport Engine::evaluate(const EvaluateRequest& request) {
  request.validate();
  const auto t_start = SteadyClock::now();
  ScoreReport report;
  report.radius_m = request.radius_m;

  // --- geocode ---------------------------------------------------------------
  auto t = SteadyClock::now();
  report.location = resolve(request, report);
  report.timings["geocode"] = ms_since(t);
  const GeoPoint center = report.location.point;

  // --- fan-out ---------------------------------------------------------------
  auto& gw = *parts_.gateway;
  auto& providers = parts_.providers;
  t = SteadyClock::now();

  auto run_feed = [](auto&& body) {
    using T = typename std::decay_t<decltype(body())>::first_type;
    FeedResult<T> r;
    const auto start = SteadyClock::now();
    try {
      auto [value, freshness] = body();
      r.value = std::move(value);
      r.freshness = freshness;
    } catch (const Error& e) {
      r.error = e.code();
      spdlog::debug("feed failed: {}", e.what());
    }
    r.ms = ms_since(start);
    return r;
  };

  const double radius = request.radius_m;
  auto facilities_future = std::async(std::launch::async, [&] {
    return run_feed([&] {
      const json params{{"lat", key_coord(center.lat)}, {"lon", key_coord(center.lon)}, {"radius_m", radius}};
      return gw.call<std::vector<Facility>>(
          resilience::make_cache_key("facilities", "query", params), Feed::Facilities,
          std::function<std::vector<Facility>()>([&] { return providers.facilities->fetch(center, radius); }));
    });
  });

  const auto points = geodata::sample_points(center);
  std::vector<std::future<FeedResult<TrafficSample>>> traffic_futures;
  for (const auto& p : points) {
    traffic_futures.push_back(std::async(std::launch::async, [&, p] {
      return run_feed([&] {
        const json params{{"lat", key_coord(p.lat)}, {"lon", key_coord(p.lon)}, {"zoom", 10}};
        return gw.call<TrafficSample>(resilience::make_cache_key("traffic", "flow_segment", params), Feed::Traffic,
                                      std::function<TrafficSample()>([&] { return providers.traffic->fetch(p); }));
      });
    }));
  }

  const int window = parts_.air_window_days;
  auto air_future = std::async(std::launch::async, [&] {
    return run_feed([&] {
      const json params{{"lat", key_coord(center.lat)}, {"lon", key_coord(center.lon)}, {"window_days", window}};
      return gw.call<std::vector<PollutantSeries>>(
          resilience::make_cache_key("air", "history", params), Feed::Air,
          std::function<std::vector<PollutantSeries>()>(
              [&] { return providers.air->fetch_history(center, window); }));
    });
  });

  auto facilities = facilities_future.get();
  std::vector<FeedResult<TrafficSample>> traffic;
  for (auto& f : traffic_futures) traffic.push_back(f.get());
  auto air = air_future.get();
  report.timings["fanout"] = ms_since(t);
  report.timings["facilities"] = facilities.ms;
  report.timings["air"] = air.ms;
  double traffic_ms = 0.0;
  for (const auto& r : traffic) traffic_ms = std::max(traffic_ms, r.ms);
  report.timings["traffic"] = traffic_ms;

  // --- scoring ---------------------------------------------------------------
  t = SteadyClock::now();
  const auto& cal = parts_.calibration;
  scoring::SubScores sub;
  std::vector<Facility> deduped;

  if (facilities.value) {
    deduped = geodata::dedupe_facilities(*facilities.value);
    report.facilities = geodata::summarize_facilities(deduped, center);
    const auto schools = report.facilities.schools;
    sub.lifestyle = scoring::lifestyle_score(report.facilities.lifestyle_counts(), cal);
    sub.education = scoring::education_score(schools, cal);
    sub.metro = scoring::metro_score(report.facilities.nearest_metro_m, cal);
    sub.surface = scoring::surface_score(static_cast<int>(report.facilities.routes.size()), cal);
    report.feed_status[Feed::Facilities] = freshness_label(facilities.freshness);
    if (facilities.freshness == Freshness::Stale) report.degraded.insert(Feed::Facilities);
  } else {
    report.facilities = geodata::summarize_facilities({}, center);
    report.feed_status[Feed::Facilities] = "missing";
    report.degraded.insert(Feed::Facilities);
  }

  std::vector<std::optional<TrafficSample>> samples;
  bool traffic_failed = false;
  bool traffic_stale = false;
  for (const auto& r : traffic) {
    samples.push_back(r.value);
    if (r.value && r.freshness == Freshness::Stale) traffic_stale = true;
    // NoSegment means there is simply no road there; anything else is a failure.
    if (!r.value && r.error != ErrorCode::NoSegment) traffic_failed = true;
  }
  report.traffic_samples = static_cast<int>(std::count_if(samples.begin(), samples.end(),
                                                          [](const auto& s) { return s.has_value(); }));
  try {
    sub.traffic = scoring::traffic_score(samples);
    if (traffic_failed || traffic_stale) report.degraded.insert(Feed::Traffic);
    report.feed_status[Feed::Traffic] =
        traffic_failed ? "partial" : (traffic_stale ? "stale" : freshness_label(traffic.front().freshness));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoData) throw;
    sub.traffic = 0.0;
    report.degraded.insert(Feed::Traffic);
    report.feed_status[Feed::Traffic] = "missing";
  }

  if (air.value) {
    try {
      sub.air = scoring::air_score(geodata::mean_concentrations(*air.value), parts_.pollutants);
      report.feed_status[Feed::Air] = freshness_label(air.freshness);
      if (air.freshness == Freshness::Stale) report.degraded.insert(Feed::Air);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoData) throw;
      sub.air = 0.0;
      report.degraded.insert(Feed::Air);
      report.feed_status[Feed::Air] = "missing";
    }
  } else {
    sub.air = 0.0;
    report.degraded.insert(Feed::Air);
    report.feed_status[Feed::Air] = "missing";
  }

  const scoring::PreferenceProfile profile = request.profile ? *request.profile : profile_for(request.user_id);
  report.weights = scoring::normalize_weights(profile);
  report.traffic_sensitive = profile.traffic_sensitive;
  report.sub_scores = sub;
  report.aggregate = scoring::aggregate(sub, report.weights);
  report.profile_hash = explain::profile_hash(profile);
  report.timings["scoring"] = ms_since(t);

  // --- persist ---------------------------------------------------------------
  t = SteadyClock::now();
  auto& store = *parts_.store;
  const auto location = store.upsert_location(center, report.location.display_name, district_of(report.location));
  report.location_id = location.id;
  const auto saved = store.save_score(location.id, sub, report.aggregate, report.profile_hash);
  report.evaluated_at = saved.evaluated_at;
  report.timings["persist"] = ms_since(t);

  // --- explain ---------------------------------------------------------------
  t = SteadyClock::now();
  explain::ExplainPayload payload;
  payload.sub_scores = sub;
  payload.aggregate = report.aggregate;
  payload.top_facilities = top_facilities(deduped);
  payload.routes.assign(report.facilities.routes.begin(), report.facilities.routes.end());
  payload.radius_m = request.radius_m;
  payload.locale = request.locale.value_or(parts_.default_locale);
  report.explanation = parts_.explainer->get_explanation(location.id, payload, profile);
  report.timings["explain"] = ms_since(t);
  report.timings["total"] = ms_since(t_start);

  std::string degraded;
  for (Feed f : report.degraded) degraded += (degraded.empty() ? "" : ",") + std::string(resilience::to_string(f));
  spdlog::info("evaluation location_id={} aggregate={} degraded=[{}] total_ms={:.1f}", report.location_id,
               report.aggregate, degraded, report.timings["total"]);
  return report;
}

std::unique_ptr<Engine> make_engine(const Config& cfg, std::shared_ptr<const Clock> clock,
                                    std::shared_ptr<resilience::SharedCache> shared_cache) {
  EngineParts parts;
  parts.clock = clock;
  parts.providers = geodata::make_providers(cfg, clock);
  if (!shared_cache) shared_cache = resilience::make_shared_cache(cfg, clock);
  parts.gateway = std::make_shared<resilience::ResilientGateway>(clock, std::move(shared_cache),
                                                                 resilience::gateway_options_from(cfg));
  parts.store = persistence::make_store(cfg, clock);
  parts.explainer = explain::make_explainer(cfg, clock);
  parts.calibration = scoring::calibration_from(cfg);
  parts.pollutants = scoring::pollutant_model_from(cfg);
  parts.default_locale = cfg.get_string("explain.locale", "ro");
  return std::make_unique<Engine>(std::move(parts));
}

}  // namespace urbanscore::service
