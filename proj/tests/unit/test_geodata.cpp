#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/codec.hpp"
#include "urbanscore/geodata/facilities.hpp"
#include "urbanscore/geodata/providers.hpp"
#include "urbanscore/geodata/wire.hpp"

using namespace urbanscore;
using namespace urbanscore::geodata;
using nlohmann::json;
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

Facility at(FacilityCategory c, std::string name, const GeoPoint& p) {
  Facility f;
  f.category = c;
  f.name = std::move(name);
  f.point = p;
  return f;
}

class RecordingTransport final : public HttpTransport {
 public:
  HttpResponse next;
  std::vector<HttpRequest> sent;

  HttpResponse send(const HttpRequest& r) override {
    sent.push_back(r);
    return next;
  }
};

}  // namespace

TEST(FoldText, LowercasesAndFoldsDiacritics) {
  EXPECT_EQ(fold_text("Școala Gimnazială ȚĂRANCA Îngerul Ş ţ"), "scoala gimnaziala taranca ingerul s t");
  EXPECT_EQ(fold_text("COLEGIUL Național"), "colegiul national");
}

TEST(Categorize, MapsTagsToCategories) {
  using M = std::map<std::string, std::string>;
  EXPECT_EQ(categorize(M{{"shop", "supermarket"}}), FacilityCategory::Supermarket);
  EXPECT_EQ(categorize(M{{"amenity", "restaurant"}}), FacilityCategory::Restaurant);
  EXPECT_EQ(categorize(M{{"amenity", "fast_food"}}), FacilityCategory::FastFood);
  EXPECT_EQ(categorize(M{{"leisure", "park"}}), FacilityCategory::Park);
  EXPECT_EQ(categorize(M{{"amenity", "kindergarten"}}), FacilityCategory::Kindergarten);
  EXPECT_EQ(categorize(M{{"railway", "subway_entrance"}}), FacilityCategory::MetroEntrance);
  EXPECT_EQ(categorize(M{{"railway", "tram_stop"}}), FacilityCategory::TramStop);
  EXPECT_EQ(categorize(M{{"public_transport", "platform"}, {"tram", "yes"}}), FacilityCategory::TramStop);
  EXPECT_EQ(categorize(M{{"highway", "bus_stop"}}), FacilityCategory::BusStop);
  EXPECT_EQ(categorize(M{{"public_transport", "platform"}, {"bus", "yes"}}), FacilityCategory::BusStop);
  EXPECT_FALSE(categorize(M{{"amenity", "bench"}}));
  EXPECT_FALSE(categorize(M{{"public_transport", "platform"}}));
  EXPECT_FALSE(categorize(M{}));
}

TEST(ClassifyEducation, KeywordsGradesAndLevels) {
  using M = std::map<std::string, std::string>;
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Liceul Teoretic Ion Creangă"}}), FacilityCategory::HighSchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "COLEGIUL NAȚIONAL Gheorghe Lazăr"}}),
            FacilityCategory::HighSchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Școala Gimnazială nr. 133"}}), FacilityCategory::PrimarySchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Școala X"}, {"grades", "5-12"}}), FacilityCategory::HighSchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Școala Y"}, {"grades", "0-8"}}),
            FacilityCategory::PrimarySchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"isced:level", "2;3"}}), FacilityCategory::HighSchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"operator", "Liceul Tehnologic"}}), FacilityCategory::HighSchool);
  EducationRules custom{{"academia"}};
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Academia de Muzică"}}, custom), FacilityCategory::HighSchool);
  EXPECT_EQ(categorize(M{{"amenity", "school"}, {"name", "Liceul 1"}}, custom), FacilityCategory::PrimarySchool);

  Facility f = at(FacilityCategory::PrimarySchool, "Liceul 2", {0, 0});
  f.tags = {{"amenity", "school"}};
  EXPECT_EQ(classify_education(f), FacilityCategory::HighSchool);
}

TEST(RouteRefs, SplitsOnSemicolonsAndCommas) {
  EXPECT_EQ(parse_route_refs("1;7, 19"), (std::set<std::string>{"1", "19", "7"}));
  EXPECT_EQ(parse_route_refs(" 116 ;; "), (std::set<std::string>{"116"}));
  EXPECT_TRUE(parse_route_refs("").empty());
}

TEST(NormalizeName, TrimsLowercasesCollapses) {
  EXPECT_EQ(normalize_name("  Mega   Image \t"), "mega image");
  EXPECT_EQ(normalize_name(""), "");
}

TEST(Dedupe, FirstOccurrenceWinsOrderPreserved) {
  const GeoPoint p{44.4, 26.1};
  const GeoPoint q{44.4000004, 26.1000004};  // same at 6 dp
  const GeoPoint r{44.401, 26.1};
  std::vector<Facility> in{at(FacilityCategory::Supermarket, "Lidl", p),
                           at(FacilityCategory::Restaurant, "A", r),
                           at(FacilityCategory::Supermarket, " LIDL ", q),
                           at(FacilityCategory::Park, "", p),
                           at(FacilityCategory::Park, "", p),
                           at(FacilityCategory::Restaurant, "A", p)};
  in[0].tags["first"] = "1";
  const auto out = dedupe_facilities(in);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].tags.count("first"), 1u);
  EXPECT_EQ(out[1].name, "A");
  EXPECT_EQ(out[2].name, "");
  EXPECT_EQ(out[3].name, "A");
}

TEST(Dedupe, Idempotent) {
  std::vector<Facility> in;
  for (int i = 0; i < 30; ++i) in.push_back(at(FacilityCategory::Park, "p" + std::to_string(i % 7), {44.0 + (i % 5) * 1e-3, 26}));
  const auto once = dedupe_facilities(in);
  EXPECT_EQ(dedupe_facilities(once).size(), once.size());
}

TEST(Summarize, CountsRoutesMetroSchools) {
  const GeoPoint c{44.4, 26.1};
  std::vector<Facility> in{
      at(FacilityCategory::Supermarket, "s", destination(c, 0, 100)),
      at(FacilityCategory::MetroEntrance, "m1", destination(c, 90, 640)),
      at(FacilityCategory::MetroEntrance, "m2", destination(c, 180, 310)),
      at(FacilityCategory::PrimarySchool, "p", destination(c, 270, 400)),
      at(FacilityCategory::BusStop, "b", destination(c, 10, 50)),
      at(FacilityCategory::TramStop, "t", destination(c, 20, 50)),
  };
  in[4].route_refs = {"116", "232"};
  in[5].route_refs = {"1", "116"};
  const auto s = summarize_facilities(in, c);
  EXPECT_EQ(s.counts.size(), kFacilityCategoryCount);
  EXPECT_EQ(s.count(FacilityCategory::Supermarket), 1);
  EXPECT_EQ(s.count(FacilityCategory::Restaurant), 0);
  EXPECT_EQ(s.routes, (std::set<std::string>{"1", "116", "232"}));
  ASSERT_TRUE(s.nearest_metro_m);
  EXPECT_NEAR(*s.nearest_metro_m, 310.0, 1e-6);
  ASSERT_EQ(s.schools.size(), 1u);
  EXPECT_NEAR(s.schools[0].distance_m, 400.0, 1e-6);
  EXPECT_DOUBLE_EQ(s.entropy_nats, 0.0);  // a single lifestyle category
}

TEST(Summarize, EmptyInput) {
  const auto s = summarize_facilities({}, {44, 26});
  EXPECT_FALSE(s.nearest_metro_m);
  EXPECT_TRUE(s.routes.empty());
  EXPECT_EQ(s.lifestyle_counts().size(), 4u);
}

TEST(SamplePoints, CenterPlusFourDiagonalsAt550m) {
  const GeoPoint c{44.4108, 26.1084};
  const auto pts = sample_points(c);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[0], c);
  for (int i = 1; i < 5; ++i) EXPECT_NEAR(great_circle_m(c, pts[i]), 550.0, 1e-6);
  EXPECT_GT(pts[1].lat, c.lat);
  EXPECT_GT(pts[1].lon, c.lon);
  EXPECT_LT(pts[2].lat, c.lat);
  EXPECT_LT(pts[3].lon, c.lon);
  EXPECT_GT(pts[4].lat, c.lat);
  EXPECT_LT(pts[4].lon, c.lon);
}

TEST(Wire, GeocodeRequests) {
  const auto f = wire::forward_geocode_request("https://n.example", "Str. X 1");
  EXPECT_EQ(f.path, "/search");
  EXPECT_NE(std::find(f.query.begin(), f.query.end(), std::pair<std::string, std::string>{"format", "jsonv2"}),
            f.query.end());
  const auto r = wire::reverse_geocode_request("https://n.example", {44.4108, 26.1084});
  EXPECT_EQ(r.path, "/reverse");
  EXPECT_EQ(r.query[0].second, "44.410800");
}

TEST(Wire, ForwardGeocodeParsesFirstPlace) {
  const json body = json::parse(R"([{"lat":"44.41","lon":"26.10","display_name":"A","address":{"suburb":"Tineretului","n":1}},
                                    {"lat":"1","lon":"2","display_name":"B"}])");
  const auto a = wire::parse_forward_geocode(body, "q");
  EXPECT_DOUBLE_EQ(a.point.lat, 44.41);
  EXPECT_EQ(a.display_name, "A");
  EXPECT_EQ(a.hierarchy.at("suburb"), "Tineretului");
  EXPECT_EQ(a.hierarchy.count("n"), 0u);
  EXPECT_EQ(code_of([&] { wire::parse_forward_geocode(json::array(), "q"); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { wire::parse_forward_geocode(json::object(), "q"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { wire::parse_forward_geocode(json::parse(R"([{"lat":"x","lon":"1","display_name":"A"}])"), "q"); }),
            ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { wire::parse_forward_geocode(json::parse(R"([{"lat":"95","lon":"1","display_name":"A"}])"), "q"); }),
            ErrorCode::MalformedResponse);
}

TEST(Wire, ReverseGeocodeErrorIsNotFound) {
  EXPECT_EQ(code_of([] { wire::parse_reverse_geocode(json{{"error", "Unable to geocode"}}, {0, 0}); }),
            ErrorCode::NotFound);
}

TEST(Wire, ParseBodyRejectsInvalidJson) {
  EXPECT_EQ(code_of([] { wire::parse_body("{oops", "x"); }), ErrorCode::MalformedResponse);
}

TEST(Wire, OverpassQueryCoversEveryCategory) {
  const auto q = wire::overpass_query({44.4108, 26.1084}, 800);
  for (const char* needle : {"supermarket", "restaurant", "fast_food", "school", "kindergarten", "park",
                             "subway_entrance", "tram_stop", "bus_stop", "around:800,44.410800,26.108400",
                             "out center"}) {
    EXPECT_NE(q.find(needle), std::string::npos) << needle;
  }
  const auto r = wire::facilities_request("https://o.example/api/interpreter", {44.4, 26.1}, 800);
  EXPECT_EQ(r.method, "POST");
  EXPECT_EQ(r.body.rfind("data=", 0), 0u);
}

TEST(Wire, FacilitiesUseCenterForWaysAndFilterRadius) {
  const GeoPoint c{44.4, 26.1};
  const auto near = destination(c, 0, 100);
  const auto far = destination(c, 0, 900);
  const json body{{"elements",
                   {{{"type", "way"}, {"center", {{"lat", near.lat}, {"lon", near.lon}}}, {"tags", {{"leisure", "park"}}}},
                    {{"type", "node"}, {"lat", far.lat}, {"lon", far.lon}, {"tags", {{"shop", "supermarket"}}}},
                    {{"type", "node"}, {"lat", near.lat}, {"lon", near.lon}},
                    {{"type", "node"},
                     {"lat", near.lat},
                     {"lon", near.lon},
                     {"tags", {{"highway", "bus_stop"}, {"route_ref", "1;2"}, {"name", "S"}}}}}}};
  const auto out = wire::parse_facilities(body, c, 800);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].category, FacilityCategory::Park);
  EXPECT_NEAR(out[0].distance_m, 100.0, 1e-6);
  EXPECT_EQ(out[1].route_refs, (std::set<std::string>{"1", "2"}));
  EXPECT_EQ(out[1].name, "S");
  EXPECT_EQ(code_of([&] { wire::parse_facilities(json{{"elements", {{{"tags", {{"leisure", "park"}}}}}}}, c, 800); }),
            ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([&] { wire::parse_facilities(json::array(), c, 800); }), ErrorCode::MalformedResponse);
}

TEST(Wire, TrafficRequestAndParse) {
  const auto r = wire::traffic_request("https://t.example", "KEY", {44.4108, 26.1084});
  EXPECT_EQ(r.path, "/traffic/services/4/flowSegmentData/absolute/10/json");
  EXPECT_EQ(r.query[0].second, "44.410800,26.108400");
  EXPECT_EQ(r.query.back().second, "KEY");

  const json ok{{"flowSegmentData",
                 {{"currentSpeed", 25}, {"freeFlowSpeed", 50}, {"currentTravelTime", 120}, {"freeFlowTravelTime", 60},
                  {"confidence", 0.9}}}};
  const auto s = wire::parse_traffic(ok, {1, 2});
  EXPECT_DOUBLE_EQ(s.current_speed, 25);
  EXPECT_DOUBLE_EQ(s.confidence, 0.9);
  EXPECT_EQ(s.point, (GeoPoint{1, 2}));

  const json no_segment{{"detailedError", {{"message", "Point too far from nearest existing segment."}}}};
  EXPECT_EQ(code_of([&] { wire::parse_traffic(no_segment, {1, 2}); }), ErrorCode::NoSegment);
  EXPECT_EQ(code_of([&] { wire::parse_traffic(json{{"error", "Invalid key"}}, {1, 2}); }), ErrorCode::MalformedResponse);
  json bad = ok;
  bad["flowSegmentData"]["confidence"] = 1.5;
  EXPECT_EQ(code_of([&] { wire::parse_traffic(bad, {1, 2}); }), ErrorCode::MalformedResponse);
  bad = ok;
  bad["flowSegmentData"].erase("currentSpeed");
  EXPECT_EQ(code_of([&] { wire::parse_traffic(bad, {1, 2}); }), ErrorCode::MalformedResponse);
}

TEST(Wire, AirHistorySortsAndKeepsGaps) {
  const json body = json::parse(R"({"list":[
      {"dt":3600,"components":{"pm2_5":3.0,"pm10":1.0}},
      {"dt":0,"components":{"pm2_5":1.0}},
      {"dt":7200,"components":{}}]})");
  const auto series = wire::parse_air_history(body, 90);
  ASSERT_EQ(series.size(), 6u);
  const auto& pm25 = series[0];
  EXPECT_EQ(pm25.pollutant, Pollutant::PM25);
  ASSERT_EQ(pm25.readings.size(), 2u);
  EXPECT_LT(pm25.readings[0].at, pm25.readings[1].at);
  EXPECT_DOUBLE_EQ(*pm25.mean(), 2.0);
  EXPECT_EQ(series[1].readings.size(), 1u);
  EXPECT_FALSE(series[2].mean());
  const auto means = mean_concentrations(series);
  EXPECT_EQ(means.size(), 2u);
  EXPECT_EQ(code_of([] { wire::parse_air_history(json::parse(R"({"list":[{"dt":1,"components":{"co":-1}}]})"), 90); }),
            ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] {
              wire::parse_air_history(json::parse(R"({"list":[{"dt":1,"components":{"co":1}},{"dt":1,"components":{"co":2}}]})"), 90);
            }),
            ErrorCode::MalformedResponse);
}

TEST(Wire, AirRequestWindow) {
  const auto end = ut::fixture_epoch();
  const auto r = wire::air_history_request("https://a.example", "K", {44.4, 26.1}, end - std::chrono::hours(24 * 90), end);
  EXPECT_EQ(r.path, "/data/2.5/air_pollution/history");
  EXPECT_EQ(r.query[2].second, std::to_string(1715677200 - 90 * 86400));
  EXPECT_EQ(r.query[3].second, "1715677200");
}

TEST(Transport, SplitBaseUrlAndEncode) {
  EXPECT_EQ(split_base_url("https://host:8080/api/x/"), (std::pair<std::string, std::string>{"https://host:8080", "/api/x"}));
  EXPECT_EQ(split_base_url("http://h"), (std::pair<std::string, std::string>{"http://h", ""}));
  EXPECT_EQ(url_encode("a b&c/ș"), "a%20b%26c%2F%C8%99");
}

TEST(CheckStatus, MapsStatuses) {
  EXPECT_NO_THROW(check_status({200, ""}, "x"));
  EXPECT_EQ(code_of([] { check_status({503, ""}, "x"); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(code_of([] { check_status({429, ""}, "x"); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(code_of([] { check_status({403, ""}, "x"); }), ErrorCode::MalformedResponse);
}

TEST(LiveProviders, BuildRequestsAndParseResponses) {
  auto t = std::make_shared<RecordingTransport>();
  LiveGeocodingProvider geo(t, "https://nominatim.example");
  t->next = {200, R"([{"lat":"44.41","lon":"26.10","display_name":"X"}])"};
  EXPECT_EQ(geo.forward("Str. X").display_name, "X");
  EXPECT_EQ(t->sent.back().path, "/search");
  t->next = {502, "bad gateway"};
  EXPECT_EQ(code_of([&] { geo.forward("Str. X"); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(code_of([&] { geo.forward("   "); }), ErrorCode::NotFound);

  LiveTrafficProvider traffic(t, "https://t.example", "K");
  t->next = {400, R"({"detailedError":{"message":"Point too far from nearest existing segment."}})"};
  EXPECT_EQ(code_of([&] { traffic.fetch({44.4, 26.1}); }), ErrorCode::NoSegment);

  auto clock = std::make_shared<ManualClock>(ut::fixture_epoch());
  LiveAirQualityProvider air(t, "https://a.example", "K", clock);
  t->next = {200, R"({"list":[]})"};
  EXPECT_EQ(air.fetch_history({44.4, 26.1}, 90).size(), 6u);
  EXPECT_EQ(code_of([&] { air.fetch_history({44.4, 26.1}, 0); }), ErrorCode::InvalidArgument);

  LiveFacilityProvider fac(t, "https://o.example");
  EXPECT_EQ(code_of([&] { fac.fetch({44.4, 26.1}, 99); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { fac.fetch({44.4, 26.1}, 5001); }), ErrorCode::InvalidArgument);
  t->next = {200, R"({"elements":[]})"};
  EXPECT_TRUE(fac.fetch({44.4, 26.1}, 800).empty());
}

TEST(FixtureStore, NumericParamsMatchWithinTolerance) {
  EXPECT_TRUE(FixtureStore::params_match(json{{"lat", 44.4108}, {"q", "a"}}, json{{"lat", 44.410804}, {"q", "a"}}));
  EXPECT_FALSE(FixtureStore::params_match(json{{"lat", 44.4108}}, json{{"lat", 44.41082}}));
  EXPECT_FALSE(FixtureStore::params_match(json{{"lat", 1}}, json{{"lat", 1}, {"lon", 2}}));
  EXPECT_FALSE(FixtureStore::params_match(json{{"q", "a"}}, json{{"q", "b"}}));
}

TEST(FixtureProviders, TineretuliFacilityOracle) {
  const auto p = ut::fixture_providers();
  const auto center = p.geocoding->forward(ut::kAddress).point;
  EXPECT_EQ(center, ut::kCenter);
  const auto raw = p.facilities->fetch(center, 800);
  const auto facilities = dedupe_facilities(raw);
  EXPECT_EQ(raw.size(), facilities.size() + 2);  // one node/way pair and one verbatim duplicate
  const auto s = summarize_facilities(facilities, center);
  EXPECT_EQ(s.count(FacilityCategory::Supermarket), 9);
  EXPECT_EQ(s.count(FacilityCategory::Restaurant), 38);
  EXPECT_EQ(s.count(FacilityCategory::FastFood), 4);
  EXPECT_EQ(s.count(FacilityCategory::Park), 12);
  EXPECT_EQ(s.count(FacilityCategory::BusStop), 29);
  EXPECT_EQ(s.count(FacilityCategory::TramStop), 12);
  EXPECT_EQ(s.count(FacilityCategory::MetroEntrance), 2);
  EXPECT_EQ(s.routes.size(), 11u);
  EXPECT_EQ(s.routes.count("999"), 0u);
  ASSERT_TRUE(s.nearest_metro_m);
  EXPECT_NEAR(*s.nearest_metro_m, 320.0, 0.2);
  std::map<FacilityCategory, std::vector<double>> schools;
  for (const auto& sd : s.schools) schools[sd.category].push_back(sd.distance_m);
  for (auto& [_, v] : schools) std::sort(v.begin(), v.end());
  ASSERT_EQ(schools[FacilityCategory::Kindergarten].size(), 1u);
  ASSERT_EQ(schools[FacilityCategory::PrimarySchool].size(), 3u);
  ASSERT_EQ(schools[FacilityCategory::HighSchool].size(), 1u);
  EXPECT_NEAR(schools[FacilityCategory::Kindergarten][0], 300, 0.2);
  EXPECT_NEAR(schools[FacilityCategory::PrimarySchool][0], 250, 0.2);
  EXPECT_NEAR(schools[FacilityCategory::PrimarySchool][1], 400, 0.2);
  EXPECT_NEAR(schools[FacilityCategory::PrimarySchool][2], 700, 0.2);
  EXPECT_NEAR(schools[FacilityCategory::HighSchool][0], 200, 0.2);

  // The larger recorded radius includes the outer ring.
  const auto wide = summarize_facilities(dedupe_facilities(p.facilities->fetch(center, 1000)), center);
  EXPECT_EQ(wide.routes.size(), 12u);
  EXPECT_EQ(wide.count(FacilityCategory::Restaurant), 38);
}

TEST(FixtureProviders, ErrorsFromRecordings) {
  const auto p = ut::fixture_providers();
  EXPECT_EQ(code_of([&] { p.geocoding->forward(ut::kUnparseable); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { p.geocoding->reverse(ut::kOcean); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { p.traffic->fetch(ut::kPark); }), ErrorCode::NoSegment);
  EXPECT_EQ(code_of([&] { p.geocoding->forward("never recorded"); }), ErrorCode::ProviderUnavailable);
  EXPECT_EQ(code_of([&] { p.facilities->fetch(ut::kCenter, 1500); }), ErrorCode::ProviderUnavailable);
}

TEST(FixtureProviders, AirMeansMatchConstruction) {
  const auto p = ut::fixture_providers();
  const auto means = mean_concentrations(p.air->fetch_history(ut::kCenter, 90));
  EXPECT_NEAR(means.at(Pollutant::PM25), 1.2, 1e-9);
  EXPECT_NEAR(means.at(Pollutant::PM10), 1.8, 1e-9);
  EXPECT_NEAR(means.at(Pollutant::CO), 200.0, 1e-9);
  EXPECT_NEAR(means.at(Pollutant::NO2), 1.25, 1e-9);
  EXPECT_NEAR(means.at(Pollutant::O3), 5.0, 1e-9);
  EXPECT_NEAR(means.at(Pollutant::NH3), 0.4, 1e-9);
}

TEST(FixtureProviders, TrafficSamplesAtSamplePoints) {
  const auto p = ut::fixture_providers();
  const auto pts = sample_points(ut::kCenter);
  const double expected_conf[] = {0.95, 1.0, 0.9, 1.0, 1.0};
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_DOUBLE_EQ(p.traffic->fetch(pts[i]).confidence, expected_conf[i]);
}

TEST(Codec, RoundTripsDomainTypes) {
  Facility f = at(FacilityCategory::TramStop, "T", {44.4, 26.1});
  f.route_refs = {"1", "10"};
  f.tags = {{"railway", "tram_stop"}};
  f.distance_m = 12.5;
  const Facility g = json(f).get<Facility>();
  EXPECT_EQ(g.category, f.category);
  EXPECT_EQ(g.route_refs, f.route_refs);
  EXPECT_EQ(g.tags, f.tags);
  EXPECT_DOUBLE_EQ(g.distance_m, 12.5);

  TrafficSample s{{1, 2}, 30, 50, 90, 60, 0.8};
  const auto s2 = json(s).get<TrafficSample>();
  EXPECT_DOUBLE_EQ(s2.free_flow_travel_time, 60);

  PollutantSeries ps{Pollutant::O3, {{ut::fixture_epoch(), 4.5}}, 30};
  const auto ps2 = json(ps).get<PollutantSeries>();
  EXPECT_EQ(ps2.pollutant, Pollutant::O3);
  EXPECT_EQ(ps2.readings.at(0).at, ut::fixture_epoch());
  EXPECT_EQ(ps2.window_days, 30);

  ResolvedAddress a{{44.4, 26.1}, "X", {{"suburb", "S"}}, "q"};
  const auto a2 = json(a).get<ResolvedAddress>();
  EXPECT_EQ(a2.hierarchy, a.hierarchy);
  EXPECT_EQ(a2.point, a.point);
}

TEST(Names, CategoryAndPollutantRoundTrip) {
  for (auto c : kAllFacilityCategories) EXPECT_EQ(facility_category_from_string(to_string(c)), c);
  for (auto p : kAllPollutants) EXPECT_EQ(pollutant_from_string(to_string(p)), p);
  EXPECT_FALSE(facility_category_from_string("casino"));
}
