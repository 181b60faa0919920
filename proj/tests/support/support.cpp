#include "support.hpp"

#include <fmt/format.h>

#include <random>
#include <thread>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/facilities.hpp"
#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore::testing {

namespace fs = std::filesystem;
using namespace geodata;

fs::path source_dir() { return URBANSCORE_TEST_SOURCE_DIR; }
fs::path fixtures_dir() { return source_dir() / "fixtures" / "tineretului"; }
fs::path data_dir() { return source_dir() / "data"; }

TempDir::TempDir() {
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (;;) {
    path_ = base / fmt::format("urbanscore-test-{:016x}", (static_cast<std::uint64_t>(rd()) << 32) | rd());
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void StubControl::enter(const char* provider) {
  ++calls;
  if (const int d = delay_ms.load(); d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
  if (down) fail(ErrorCode::ProviderUnavailable, fmt::format("{} stub is down", provider));
}

int StubControls::total_calls() const { return geocode.calls + facilities.calls + traffic.calls + air.calls; }

namespace {

class InstrumentedGeocoding final : public GeocodingProvider {
 public:
  InstrumentedGeocoding(std::shared_ptr<GeocodingProvider> inner, std::shared_ptr<StubControls> c)
      : inner_(std::move(inner)), c_(std::move(c)) {}

 protected:
  ResolvedAddress do_forward(const std::string& q) override {
    c_->geocode.enter("geocode");
    return inner_->forward(q);
  }
  ResolvedAddress do_reverse(const GeoPoint& p) override {
    c_->geocode.enter("geocode");
    return inner_->reverse(p);
  }

 private:
  std::shared_ptr<GeocodingProvider> inner_;
  std::shared_ptr<StubControls> c_;
};

class InstrumentedFacilities final : public FacilityProvider {
 public:
  InstrumentedFacilities(std::shared_ptr<FacilityProvider> inner, std::shared_ptr<StubControls> c)
      : inner_(std::move(inner)), c_(std::move(c)) {}

 protected:
  std::vector<Facility> do_fetch(const GeoPoint& p, double r) override {
    c_->facilities.enter("facilities");
    return inner_->fetch(p, r);
  }

 private:
  std::shared_ptr<FacilityProvider> inner_;
  std::shared_ptr<StubControls> c_;
};

class InstrumentedTraffic final : public TrafficProvider {
 public:
  InstrumentedTraffic(std::shared_ptr<TrafficProvider> inner, std::shared_ptr<StubControls> c)
      : inner_(std::move(inner)), c_(std::move(c)) {}

 protected:
  TrafficSample do_fetch(const GeoPoint& p) override {
    c_->traffic.enter("traffic");
    return inner_->fetch(p);
  }

 private:
  std::shared_ptr<TrafficProvider> inner_;
  std::shared_ptr<StubControls> c_;
};

class InstrumentedAir final : public AirQualityProvider {
 public:
  InstrumentedAir(std::shared_ptr<AirQualityProvider> inner, std::shared_ptr<StubControls> c)
      : inner_(std::move(inner)), c_(std::move(c)) {}

 protected:
  std::vector<PollutantSeries> do_fetch_history(const GeoPoint& p, int days) override {
    c_->air.enter("air");
    return inner_->fetch_history(p, days);
  }

 private:
  std::shared_ptr<AirQualityProvider> inner_;
  std::shared_ptr<StubControls> c_;
};

class SyntheticGeocoding final : public GeocodingProvider {
 protected:
  ResolvedAddress do_forward(const std::string& q) override {
    const auto h = std::hash<std::string>{}(q);
    ResolvedAddress a;
    a.point = GeoPoint{44.40 + static_cast<double>(h % 1000) * 1e-5, 26.10 + static_cast<double>(h / 1000 % 1000) * 1e-5};
    a.display_name = q;
    a.hierarchy = {{"suburb", "Tineretului"}, {"city", "București"}};
    a.source_query = q;
    return a;
  }
  ResolvedAddress do_reverse(const GeoPoint& p) override {
    ResolvedAddress a;
    a.point = p;
    a.display_name = "Strada Stub, București";
    a.hierarchy = {{"road", "Strada Stub"}, {"city_district", "Sector 4"}, {"city", "București"}};
    return a;
  }
};

class SyntheticFacilities final : public FacilityProvider {
 protected:
  std::vector<Facility> do_fetch(const GeoPoint& c, double radius_m) override {
    struct Placement {
      FacilityCategory category;
      const char* name;
      double bearing;
      double distance;
      const char* routes;
    };
    static const Placement placements[] = {
        {FacilityCategory::Supermarket, "Mega Image", 10, 150, ""},
        {FacilityCategory::Supermarket, "Profi", 70, 420, ""},
        {FacilityCategory::Restaurant, "Casa Veche", 130, 220, ""},
        {FacilityCategory::Restaurant, "Bistro Lac", 200, 380, ""},
        {FacilityCategory::Restaurant, "Trattoria", 260, 510, ""},
        {FacilityCategory::FastFood, "Shaorma", 300, 260, ""},
        {FacilityCategory::Park, "Parcul Mic", 40, 330, ""},
        {FacilityCategory::Kindergarten, "Grădinița 1", 90, 300, ""},
        {FacilityCategory::PrimarySchool, "Școala 2", 150, 400, ""},
        {FacilityCategory::HighSchool, "Liceul 3", 230, 200, ""},
        {FacilityCategory::MetroEntrance, "Metrou", 180, 320, ""},
        {FacilityCategory::BusStop, "Stația A", 0, 120, "116;232"},
        {FacilityCategory::TramStop, "Stația B", 120, 260, "1"},
    };
    std::vector<Facility> out;
    for (const auto& s : placements) {
      Facility f;
      f.category = s.category;
      f.name = s.name;
      f.point = destination(c, s.bearing, s.distance);
      f.route_refs = parse_route_refs(s.routes);
      f.distance_m = great_circle_m(c, f.point);
      if (f.distance_m <= radius_m) out.push_back(std::move(f));
    }
    return out;
  }
};

class SyntheticTraffic final : public TrafficProvider {
 protected:
  TrafficSample do_fetch(const GeoPoint& p) override { return TrafficSample{p, 40, 50, 60, 48, 0.95}; }
};

class SyntheticAir final : public AirQualityProvider {
 protected:
  std::vector<PollutantSeries> do_fetch_history(const GeoPoint&, int days) override {
    std::vector<PollutantSeries> out;
    const Timestamp t0 = fixture_epoch();
    for (auto p : kAllPollutants) {
      PollutantSeries s{p, {}, days};
      for (int h = 0; h < 24; ++h) s.readings.push_back({t0 + std::chrono::hours(h), 2.0});
      out.push_back(std::move(s));
    }
    return out;
  }
};

}  // namespace

Providers instrument(const Providers& inner, std::shared_ptr<StubControls> c) {
  return Providers{std::make_shared<InstrumentedGeocoding>(inner.geocoding, c),
                   std::make_shared<InstrumentedFacilities>(inner.facilities, c),
                   std::make_shared<InstrumentedTraffic>(inner.traffic, c),
                   std::make_shared<InstrumentedAir>(inner.air, c)};
}

Providers synthetic_providers() {
  return Providers{std::make_shared<SyntheticGeocoding>(), std::make_shared<SyntheticFacilities>(),
                   std::make_shared<SyntheticTraffic>(), std::make_shared<SyntheticAir>()};
}

Providers fixture_providers() {
  auto store = FixtureStore::load(fixtures_dir());
  return Providers{std::make_shared<FixtureGeocodingProvider>(store), std::make_shared<FixtureFacilityProvider>(store),
                   std::make_shared<FixtureTrafficProvider>(store), std::make_shared<FixtureAirQualityProvider>(store)};
}

std::string ScriptedGenerator::generate(const std::string& prompt, const std::string&) {
  ++calls_;
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  std::lock_guard lock(mu_);
  last_prompt_ = prompt;
  if (failing_) fail(ErrorCode::ProviderUnavailable, "generator is down");
  return reply_;
}

void ScriptedGenerator::set_reply(std::string reply) {
  std::lock_guard lock(mu_);
  reply_ = std::move(reply);
}

std::string ScriptedGenerator::last_prompt() const {
  std::lock_guard lock(mu_);
  return last_prompt_;
}

Timestamp fixture_epoch() { return *parse_iso8601("2024-05-14T09:00:00Z"); }

scoring::CalibrationConstants frozen_calibration() {
  return scoring::calibration_from(Config::load(source_dir() / "config" / "urbanscore.conf"));
}

StatsCorpus seed_stats_corpus(persistence::Store& store, ManualClock& clock) {
  using persistence::Purpose;
  const scoring::SubScores sub{80, 70, 60, 50, 40, 30};
  int next_location = 0;
  auto location_in = [&](const std::string& district) {
    ++next_location;
    return store.upsert_location({44.0 + next_location * 0.001, 26.0}, "Loc " + std::to_string(next_location), district)
        .id;
  };

  // Outside the window: before it opens, and a location with no district.
  const auto early = location_in("Sector 4");
  const auto nameless = location_in("");
  for (int i = 0; i < 5; ++i) store.save_score(early, sub, 50, "h");
  store.save_score(nameless, sub, 50, "h");
  clock.advance(std::chrono::hours(1));

  StatsCorpus corpus{clock.now(), {}};
  const int top_counts[] = {8, 7, 7, 6, 6, 6, 5, 5, 4, 4};
  for (int d = 0; d < 10; ++d) {
    // Two locations per district so counting is by district, not by location.
    const auto a = location_in(fmt::format("Top {}", d));
    const auto b = location_in(fmt::format("Top {}", d));
    for (int q = 0; q < top_counts[d]; ++q) {
      store.save_score(q % 2 ? a : b, sub, 60, "h");
      clock.advance(std::chrono::seconds(7));
    }
  }
  for (int d = 0; d < 21; ++d) {
    const auto loc = location_in(fmt::format("Other {}", d));
    for (int q = 0; q < 2; ++q) {
      store.save_score(loc, sub, 60, "h");
      clock.advance(std::chrono::seconds(7));
    }
  }
  corpus.until = clock.now();
  clock.advance(std::chrono::hours(1));
  store.save_score(early, sub, 50, "h");

  const std::pair<Purpose, scoring::WeightVector> kinds[] = {
      {Purpose::Residence, {0.14, 0.12, 0.20, 0.30, 0.10, 0.14}},
      {Purpose::Investment, {0.10, 0.10, 0.20, 0.15, 0.25, 0.20}},
      {Purpose::ShortTerm, {0.10, 0.10, 0.35, 0.05, 0.25, 0.15}}};
  const int per_kind[] = {52, 31, 17};
  int user = 0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < per_kind[k]; ++i)
      store.save_profile(fmt::format("user{:03}", user++), kinds[k].second, i % 5 == 0, kinds[k].first);
  return corpus;
}

Harness make_harness(const HarnessOptions& o) {
  Harness h;
  if (o.manual_clock) {
    h.manual_clock = std::make_shared<ManualClock>(fixture_epoch());
    h.clock = h.manual_clock;
  } else {
    h.clock = std::make_shared<SystemClock>();
  }
  h.controls = std::make_shared<StubControls>();
  h.store = o.backend == "sqlite" ? persistence::open_sqlite_store(o.storage_path, h.clock)
                                  : persistence::open_file_store(o.storage_path, h.clock);
  auto shared = o.shared_cache ? o.shared_cache : std::make_shared<resilience::InProcessCache>(h.clock);
  h.gateway = std::make_shared<resilience::ResilientGateway>(h.clock, shared, resilience::GatewayOptions{},
                                                             [](std::chrono::microseconds) {});
  service::EngineParts parts;
  parts.providers = instrument(o.synthetic ? synthetic_providers() : fixture_providers(), h.controls);
  parts.gateway = h.gateway;
  parts.store = h.store;
  parts.explainer = std::make_shared<explain::Explainer>(h.clock, explain::TemplateRenderer(data_dir(), "ro"), o.remote,
                                                         "{{payload}}", o.explain_ttl);
  parts.clock = h.clock;
  parts.calibration = o.calibration;
  h.engine = std::make_unique<service::Engine>(std::move(parts));
  return h;
}

}  // namespace urbanscore::testing
