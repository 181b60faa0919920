#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"
#include "urbanscore/clock.hpp"
#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geo.hpp"

using namespace urbanscore;
using namespace std::chrono_literals;

TEST(Iso8601, KnownEpoch) {
  // 1715677200 s is 2024-05-14T09:00:00Z.
  const auto t = parse_iso8601("2024-05-14T09:00:00Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(to_micros(*t), 1715677200LL * 1'000'000);
  EXPECT_EQ(to_iso8601(*t), "2024-05-14T09:00:00.000000Z");
}

TEST(Iso8601, RoundTripsMicroseconds) {
  for (std::int64_t us : {0LL, 1LL, 951782400123456LL, 4102444799999999LL}) {
    const auto t = from_micros(us);
    EXPECT_EQ(parse_iso8601(to_iso8601(t)), t) << us;
  }
}

TEST(Iso8601, FractionAndOptionalZone) {
  EXPECT_EQ(parse_iso8601("2000-01-01T00:00:00.5"), from_micros(946684800LL * 1'000'000 + 500'000));
  EXPECT_EQ(parse_iso8601("2000-01-01T00:00:00.1234567Z"), from_micros(946684800LL * 1'000'000 + 123'456));
}

TEST(Iso8601, RejectsMalformed) {
  for (const char* s : {"", "2024-13-01T00:00:00Z", "2024-02-30T00:00:00Z", "2024-05-14 09:00:00", "2024-05-14T25:00:00Z",
                        "2024-05-14T09:00:00.Z", "2024-05-14T09:00:00Zx"}) {
    EXPECT_FALSE(parse_iso8601(s)) << s;
  }
}

TEST(ManualClock, AdvancesAndSets) {
  ManualClock c(from_micros(10));
  c.advance(5us);
  EXPECT_EQ(to_micros(c.now()), 15);
  c.set(from_micros(3));
  EXPECT_EQ(to_micros(c.now()), 3);
}

TEST(GeoPoint, Validation) {
  EXPECT_NO_THROW(GeoPoint::make(90, 180));
  EXPECT_NO_THROW(GeoPoint::make(-90, -180));
  EXPECT_THROW(GeoPoint::make(90.0001, 0), Error);
  EXPECT_THROW(GeoPoint::make(0, -180.5), Error);
  EXPECT_FALSE((GeoPoint{std::nan(""), 0}).valid());
  EXPECT_EQ((GeoPoint{44.4108, 26.1084}).to_string(), "44.410800,26.108400");
}

TEST(GreatCircle, OneDegreeOfArcOnEquator) {
  const double expected = kEarthRadiusM * 3.14159265358979323846 / 180.0;
  EXPECT_NEAR(great_circle_m({0, 0}, {0, 1}), expected, 1e-6);
  EXPECT_NEAR(great_circle_m({0, 0}, {1, 0}), expected, 1e-6);
  EXPECT_DOUBLE_EQ(great_circle_m({44.4, 26.1}, {44.4, 26.1}), 0.0);
}

TEST(GreatCircle, Antipodes) {
  EXPECT_NEAR(great_circle_m({0, 0}, {0, 180}), kEarthRadiusM * 3.14159265358979323846, 1e-6);
}

TEST(Destination, InverseOfDistance) {
  const GeoPoint o{44.4108, 26.1084};
  for (double bearing : {0.0, 45.0, 135.0, 225.0, 315.0, 359.0}) {
    for (double d : {0.0, 1.0, 550.0, 5000.0}) {
      EXPECT_NEAR(great_circle_m(o, destination(o, bearing, d)), d, 1e-6) << bearing << " " << d;
    }
  }
}

TEST(Destination, NorthMovesLatitudeOnly) {
  const auto p = destination({10, 20}, 0.0, 1000.0);
  EXPECT_NEAR(p.lon, 20.0, 1e-12);
  EXPECT_GT(p.lat, 10.0);
}

TEST(Destination, WrapsLongitude) {
  const auto p = destination({0, 179.9999}, 90.0, 1000.0);
  EXPECT_LT(p.lon, -179.9);
}

TEST(MicroDegrees, RoundsToSixDecimals) {
  EXPECT_EQ(micro_degrees(44.4108004), 44410800);
  EXPECT_EQ(micro_degrees(44.4108006), 44410801);
  EXPECT_EQ(micro_degrees(-26.1084), -26108400);
}

TEST(Errors, NamesAndHelpers) {
  EXPECT_EQ(to_string(ErrorCode::NoSegment), "NoSegment");
  EXPECT_EQ(to_string(ErrorCode::GeocodeFailed), "GeocodeFailed");
  try {
    require(false, "boom");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    EXPECT_STREQ(e.what(), "boom");
  }
}

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = Config::parse("# comment\n\n  a.b =  1.5 \nname=hello world\nlist = x, y,, z \nflag = Yes\n");
  EXPECT_DOUBLE_EQ(c.get_double("a.b", 0), 1.5);
  EXPECT_EQ(c.get_string("name"), "hello world");
  EXPECT_EQ(c.get_list("list"), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_int("missing", 7), 7);
}

TEST(Config, RejectsBadLinesAndValues) {
  EXPECT_THROW(Config::parse("novalue\n"), Error);
  EXPECT_THROW(Config::parse(" = 3\n"), Error);
  const auto c = Config::parse("n = 12x\nb = maybe\n");
  EXPECT_THROW(c.get_int("n", 0), Error);
  EXPECT_THROW(c.get_double("n", 0), Error);
  EXPECT_THROW(c.get_bool("b", false), Error);
}

TEST(Config, DefaultsCoverEngineKeys) {
  const auto c = Config::defaults();
  for (const char* key : {"providers.mode", "cache.ttl.traffic_s", "breaker.failure_threshold", "scoring.surface_k",
                          "storage.backend", "explain.locale", "server.port"}) {
    EXPECT_TRUE(c.contains(key)) << key;
  }
  EXPECT_EQ(c.get_int("cache.ttl.geocode_s", 0), 86400);
  EXPECT_EQ(c.get_int("cache.ttl.facilities_s", 0), 600);
  EXPECT_EQ(c.get_int("cache.ttl.traffic_s", 0), 60);
  EXPECT_EQ(c.get_int("cache.ttl.air_s", 0), 3600);
}

TEST(Config, EnvironmentOverrides) {
  EXPECT_EQ(Config::env_name("scoring.surface_k"), "URBANSCORE_SCORING_SURFACE_K");
  auto c = Config::defaults();
  ::setenv("URBANSCORE_SCORING_SURFACE_K", "30", 1);
  EXPECT_GE(c.apply_env(), 1);
  ::unsetenv("URBANSCORE_SCORING_SURFACE_K");
  EXPECT_DOUBLE_EQ(c.get_double("scoring.surface_k", 0), 30.0);
}

TEST(Config, SaveAndLoadRoundTrip) {
  urbanscore::testing::TempDir dir;
  auto c = Config::parse("x.y = 3\n");
  c.save(dir.file("a.conf"));
  const auto loaded = Config::load(dir.file("a.conf"));
  EXPECT_EQ(loaded.get_int("x.y", 0), 3);
  EXPECT_TRUE(loaded.contains("providers.mode"));  // defaults overlaid
  EXPECT_THROW(Config::load(dir.file("missing.conf")), Error);
}

TEST(Config, MergeOverwrites) {
  auto a = Config::parse("k = 1\nj = 2\n");
  a.merge(Config::parse("k = 5\n"));
  EXPECT_EQ(a.get_int("k", 0), 5);
  EXPECT_EQ(a.get_int("j", 0), 2);
}
