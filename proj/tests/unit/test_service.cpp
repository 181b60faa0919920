#include <gtest/gtest.h>

#include <fmt/format.h>

#include <thread>

#include "support.hpp"
#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/service/codec.hpp"
#include "urbanscore/service/engine.hpp"
#include "urbanscore/service/stats.hpp"

using namespace urbanscore;
using namespace urbanscore::service;
using namespace std::chrono_literals;
using persistence::Purpose;
using resilience::Feed;
namespace ut = urbanscore::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Unknown;
}

EvaluateRequest address(const std::string& a) {
  EvaluateRequest r;
  r.address = a;
  return r;
}

EvaluateRequest point(const GeoPoint& p) {
  EvaluateRequest r;
  r.point = p;
  return r;
}

}  // namespace

// --- engine on the recorded fixture ----------------------------------------------

TEST(Engine, TineretuliAddressWithDefaultConstants) {
  auto h = ut::make_harness();
  const auto r = h.engine->evaluate(address(ut::kAddress));
  EXPECT_NEAR(r.sub_scores.air, 94.33, 0.01);
  EXPECT_NEAR(r.sub_scores.traffic, 75.0, 1e-9);
  EXPECT_NEAR(r.sub_scores.lifestyle, 91.68, 0.01);
  EXPECT_NEAR(r.sub_scores.education, 73.15, 0.01);
  EXPECT_NEAR(r.sub_scores.metro, 85.0, 0.05);
  EXPECT_NEAR(r.sub_scores.surface, 87.89, 0.01);
  EXPECT_EQ(r.aggregate, 84);
  EXPECT_TRUE(r.degraded.empty());
  EXPECT_EQ(r.traffic_samples, 5);
  EXPECT_EQ(r.facilities.routes.size(), 11u);
  EXPECT_EQ(r.location.hierarchy.at("suburb"), "Tineretului");
  for (Feed f : resilience::kAllFeeds) EXPECT_EQ(r.feed_status.at(f), "live");
  EXPECT_EQ(r.explanation.source, explain::Source::Template);
  EXPECT_LE(r.explanation.word_count, explain::kMaxWords);
  for (const char* stage : {"geocode", "fanout", "scoring", "persist", "explain", "total"})
    EXPECT_TRUE(r.timings.contains(stage)) << stage;
  EXPECT_EQ(h.store->find_location(r.location_id)->district, "Tineretului");
  EXPECT_EQ(h.controls->geocode.calls, 1);
  EXPECT_EQ(h.controls->facilities.calls, 1);
  EXPECT_EQ(h.controls->traffic.calls, 5);
  EXPECT_EQ(h.controls->air.calls, 1);
}

TEST(Engine, RepeatIsServedFromCacheAndAppendsHistory) {
  auto h = ut::make_harness();
  const auto first = h.engine->evaluate(address(ut::kAddress));
  h.advance(10s);
  const auto second = h.engine->evaluate(address(ut::kAddress));
  EXPECT_EQ(second.location_id, first.location_id);
  EXPECT_EQ(second.aggregate, first.aggregate);
  EXPECT_EQ(h.controls->total_calls(), 8);
  for (Feed f : resilience::kAllFeeds) EXPECT_EQ(second.feed_status.at(f), "cached");
  const auto history = h.store->list_scores(first.location_id, Timestamp{}, h.clock->now() + 1s);
  ASSERT_EQ(history.size(), 2u);
  EXPECT_LT(history[0].evaluated_at, history[1].evaluated_at);
}

TEST(Engine, UnparseableAddressFailsWithoutFurtherCalls) {
  auto h = ut::make_harness();
  EXPECT_EQ(code_of([&] { h.engine->evaluate(address(ut::kUnparseable)); }), ErrorCode::GeocodeFailed);
  EXPECT_EQ(h.controls->geocode.calls, 1);
  EXPECT_EQ(h.controls->total_calls(), 1);
  EXPECT_TRUE(h.store->list_locations().empty());
}

TEST(Engine, PointKeepsClickedCoordinates) {
  auto h = ut::make_harness();
  const auto r = h.engine->evaluate(point(ut::kCenter));
  EXPECT_EQ(r.location.point, ut::kCenter);
  EXPECT_EQ(r.aggregate, 84);
}

TEST(Engine, ParkPointSkipsMissingRoadSegment) {
  auto h = ut::make_harness();
  const auto r = h.engine->evaluate(point(ut::kPark));
  EXPECT_EQ(r.traffic_samples, 4);
  EXPECT_FALSE(r.degraded.contains(Feed::Traffic));
  EXPECT_EQ(district_of(r.location), "Sector 4");
}

TEST(Engine, EmptyPointScoresZeroTraffic) {
  auto h = ut::make_harness();
  const auto r = h.engine->evaluate(point(ut::kEmpty));
  EXPECT_EQ(r.traffic_samples, 0);
  EXPECT_DOUBLE_EQ(r.sub_scores.traffic, 0.0);
  EXPECT_EQ(r.feed_status.at(Feed::Traffic), "missing");
  EXPECT_GE(r.aggregate, 0);
}

TEST(Engine, UngeocodablePointProceedsWithBareCoordinates) {
  auto h = ut::make_harness();
  const auto r = h.engine->evaluate(point(ut::kOcean));
  EXPECT_EQ(r.location.display_name, ut::kOcean.to_string());
  EXPECT_EQ(r.feed_status.at(Feed::Geocode), "missing");
  // Nothing was recorded there, so every data feed degrades.
  EXPECT_TRUE(r.degraded.contains(Feed::Facilities));
  EXPECT_TRUE(r.degraded.contains(Feed::Air));
  EXPECT_EQ(r.aggregate, 0);
}

TEST(Engine, AirOutageDegradesOnlyAir) {
  auto h = ut::make_harness();
  h.controls->air.down = true;
  const auto r = h.engine->evaluate(address(ut::kAddress));
  EXPECT_EQ(r.degraded, (std::set<Feed>{Feed::Air}));
  EXPECT_DOUBLE_EQ(r.sub_scores.air, 0.0);
  EXPECT_EQ(r.aggregate, 65);  // 84.12 - 0.2 * 94.33, rounded
  EXPECT_EQ(h.controls->air.calls, 3);
}

TEST(Engine, StaleFeedIsReportedDegraded) {
  auto h = ut::make_harness();
  h.engine->evaluate(address(ut::kAddress));
  h.advance(61s);
  h.controls->traffic.down = true;
  const auto r = h.engine->evaluate(address(ut::kAddress));
  EXPECT_EQ(r.degraded, (std::set<Feed>{Feed::Traffic}));
  EXPECT_EQ(r.feed_status.at(Feed::Traffic), "stale");
  EXPECT_NEAR(r.sub_scores.traffic, 75.0, 1e-9);
}

TEST(Engine, ProfileSources) {
  auto h = ut::make_harness();
  h.store->save_profile("ana", {0.4, 0.12, 0.12, 0.12, 0.12, 0.12}, false, Purpose::Residence);
  auto req = address(ut::kAddress);
  req.user_id = "ana";
  const auto stored = h.engine->evaluate(req);
  EXPECT_NEAR(stored.weights[0], 0.4, 1e-12);
  req.profile = scoring::PreferenceProfile{scoring::kDefaultWeights, true};
  const auto explicit_profile = h.engine->evaluate(req);
  EXPECT_NEAR(explicit_profile.weights[1], 0.3 / 1.1, 1e-12);
  EXPECT_TRUE(explicit_profile.traffic_sensitive);
  EXPECT_NE(stored.profile_hash, explicit_profile.profile_hash);
  req.user_id = "nobody";
  req.profile.reset();
  EXPECT_EQ(h.engine->evaluate(req).weights, scoring::kDefaultWeights);
}

TEST(Engine, RemoteExplanationIsUsedWhenGrounded) {
  ut::HarnessOptions o;
  auto gen = std::make_shared<ut::ScriptedGenerator>("Zona are scorul 84 din 100.");
  o.remote = gen;
  auto h = ut::make_harness(o);
  const auto r = h.engine->evaluate(address(ut::kAddress));
  EXPECT_EQ(r.explanation.source, explain::Source::Remote);
  EXPECT_NE(gen->last_prompt().find("\"aggregate\":84"), std::string::npos);
  h.engine->evaluate(address(ut::kAddress));
  EXPECT_EQ(gen->calls(), 1);
}

TEST(Engine, RequestValidation) {
  auto h = ut::make_harness();
  EvaluateRequest both = address(ut::kAddress);
  both.point = ut::kCenter;
  EXPECT_EQ(code_of([&] { h.engine->evaluate(both); }), ErrorCode::InvalidRequest);
  EXPECT_EQ(code_of([&] { h.engine->evaluate(EvaluateRequest{}); }), ErrorCode::InvalidRequest);
  EXPECT_EQ(code_of([&] { h.engine->evaluate(address("   ")); }), ErrorCode::InvalidRequest);
  auto wide = address(ut::kAddress);
  wide.radius_m = 1e6;
  EXPECT_EQ(code_of([&] { h.engine->evaluate(wide); }), ErrorCode::InvalidRequest);
  auto zero = address(ut::kAddress);
  zero.profile = scoring::PreferenceProfile{{0, 1, 1, 1, 1, 1}, false};
  EXPECT_EQ(code_of([&] { h.engine->evaluate(zero); }), ErrorCode::InvalidRequest);
  EXPECT_EQ(h.controls->total_calls(), 0);
}

TEST(Engine, ConcurrentEvaluationsOnSyntheticStubs) {
  ut::HarnessOptions o;
  o.synthetic = true;
  o.backend = "sqlite";
  auto h = ut::make_harness(o);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        const auto r = h.engine->evaluate(address(fmt::format("Strada {} nr {}", t, i)));
        if (r.degraded.empty() && r.aggregate > 0) ++ok;
      }
    });
  for (auto& th : threads) th.join();
  EXPECT_EQ(ok, 20);
  EXPECT_EQ(h.store->scores_between(Timestamp{}, h.clock->now() + 1s).size(), 20u);
}

TEST(Engine, FromConfigWithFixtures) {
  ut::TempDir dir;
  auto cfg = Config::defaults();
  cfg.set("providers.mode", "fixtures");
  cfg.set("providers.fixtures_dir", ut::fixtures_dir().string());
  cfg.set("storage.path", dir.file("s.jsonl"));
  cfg.set("explain.data_dir", ut::data_dir().string());
  auto engine = make_engine(cfg, std::make_shared<ManualClock>(ut::fixture_epoch()));
  EXPECT_EQ(engine->evaluate(address(ut::kAddress)).aggregate, 84);
}

// --- helpers -------------------------------------------------------------------

TEST(DistrictOf, PreferenceOrder) {
  geodata::ResolvedAddress a;
  EXPECT_EQ(district_of(a), "");
  a.hierarchy = {{"city", "București"}};
  EXPECT_EQ(district_of(a), "București");
  a.hierarchy["city_district"] = "Sector 4";
  EXPECT_EQ(district_of(a), "Sector 4");
  a.hierarchy["suburb"] = "Tineretului";
  EXPECT_EQ(district_of(a), "Tineretului");
}

TEST(TopFacilities, NamedNearestFirstAtMostTen) {
  std::vector<geodata::Facility> fs;
  for (int i = 0; i < 15; ++i) {
    geodata::Facility f;
    f.name = i % 4 == 0 ? "" : "F" + std::to_string(i);
    f.distance_m = 1000.0 - i * 10;
    fs.push_back(f);
  }
  const auto top = top_facilities(fs);
  ASSERT_EQ(top.size(), 10u);
  EXPECT_EQ(top.front().name, "F14");
  for (std::size_t i = 1; i < top.size(); ++i) EXPECT_LE(top[i - 1].distance_m, top[i].distance_m);
}

// --- codec ---------------------------------------------------------------------

TEST(Codec, EvaluateRequestShapes) {
  const auto a = evaluate_request_from_json(json::parse(R"({"address": "Tineretului", "radius_m": 500})"));
  EXPECT_EQ(a.address, "Tineretului");
  EXPECT_DOUBLE_EQ(a.radius_m, 500);
  const auto p = evaluate_request_from_json(json::parse(
      R"({"point": {"lat": 44.4, "lon": 26.1}, "locale": "en",
          "profile": {"weights": {"air": 1, "traffic": 1, "lifestyle": 1, "education": 1, "metro": 1, "surface": 1},
                      "traffic_sensitive": true}})"));
  EXPECT_EQ(p.point, (GeoPoint{44.4, 26.1}));
  EXPECT_EQ(p.locale, "en");
  EXPECT_TRUE(p.profile->traffic_sensitive);
  for (const char* bad : {R"([])", R"({})", R"({"address": 5})", R"({"point": {"lat": 1}})",
                          R"({"address": "x", "profile": {"weights": [1, 2]}})",
                          R"({"address": "x", "profile": {"weights": {"air": 1}}})"}) {
    EXPECT_EQ(code_of([&] { evaluate_request_from_json(json::parse(bad)); }), ErrorCode::InvalidRequest) << bad;
  }
}

TEST(Codec, ProfileUpdate) {
  const auto u = profile_update_from_json(
      json::parse(R"({"weights": [2, 1, 1, 1, 1, 1], "traffic_sensitive": true, "declared_purpose": "short_term"})"));
  EXPECT_EQ(u.weights[0], 2);
  EXPECT_TRUE(u.traffic_sensitive);
  EXPECT_EQ(u.purpose, Purpose::ShortTerm);
  EXPECT_EQ(code_of([&] { profile_update_from_json(json::parse(R"({"declared_purpose": "holiday"})")); }),
            ErrorCode::InvalidRequest);
  EXPECT_EQ(code_of([&] { profile_update_from_json(json::parse(R"({"weights": [0, 1, 1, 1, 1, 1]})")); }),
            ErrorCode::InvalidRequest);
}

TEST(Codec, EncodeEscapesMarkup) {
  const auto s = encode(json{{"t", "<script>&</script>"}});
  EXPECT_EQ(s.find('<'), std::string::npos);
  EXPECT_EQ(s.find('&'), std::string::npos);
  EXPECT_EQ(json::parse(s).at("t"), "<script>&</script>");
}

TEST(Codec, ReportCarriesEveryField) {
  auto h = ut::make_harness();
  const auto j = to_json(h.engine->evaluate(address(ut::kAddress)));
  for (const char* key : {"location_id", "location", "radius_m", "sub_scores", "weights", "traffic_sensitive",
                          "aggregate", "profile_hash", "degraded", "feeds", "facilities", "traffic_samples",
                          "explanation", "timings_ms", "evaluated_at"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("aggregate"), 84);
  EXPECT_EQ(j.at("evaluated_at"), "2024-05-14T09:00:00.000000Z");
  EXPECT_EQ(weights_from_json(j.at("weights")), scoring::kDefaultWeights);
}

// --- statistics ------------------------------------------------------------------

TEST(Stats, SyntheticCorpus) {
  auto clock = std::make_shared<ManualClock>(ut::fixture_epoch());
  auto store = persistence::open_file_store(":memory:", clock);
  const auto corpus = ut::seed_stats_corpus(*store, *clock);
  const auto s = compute_stats(*store, corpus.since, corpus.until);
  EXPECT_EQ(s.total_queries, 100u);
  ASSERT_EQ(s.top_districts.size(), 10u);
  EXPECT_EQ(s.top_districts_share, 0.58);
  EXPECT_EQ(s.top_districts.front().first, "Top 0");
  EXPECT_EQ(s.top_districts.front().second, 0.08);
  EXPECT_EQ(s.purpose_distribution.at(Purpose::Residence), 0.52);
  EXPECT_EQ(s.purpose_distribution.at(Purpose::Investment), 0.31);
  EXPECT_EQ(s.purpose_distribution.at(Purpose::ShortTerm), 0.17);
  using scoring::Component;
  EXPECT_EQ(s.amenity_preference_order,
            (std::vector<Component>{Component::Lifestyle, Component::Education, Component::Metro, Component::Surface,
                                    Component::Air, Component::Traffic}));
}

TEST(Stats, EmptyWindowAndValidation) {
  auto clock = std::make_shared<ManualClock>(ut::fixture_epoch());
  auto store = persistence::open_sqlite_store(":memory:", clock);
  const auto s = compute_stats(*store, Timestamp{}, clock->now());
  EXPECT_EQ(s.total_queries, 0u);
  EXPECT_TRUE(s.top_districts.empty());
  EXPECT_DOUBLE_EQ(s.top_districts_share, 0.0);
  EXPECT_THROW(compute_stats(*store, clock->now(), Timestamp{}), Error);
  const auto j = to_json(s);
  EXPECT_EQ(j.at("total_queries"), 0);
}
