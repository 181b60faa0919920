#pragma once

// Shared test scaffolding: instrumented providers, a scripted text generator
// and an engine harness wired to fixtures or synthetic stubs.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "urbanscore/clock.hpp"
#include "urbanscore/explain/explain.hpp"
#include "urbanscore/geodata/providers.hpp"
#include "urbanscore/persistence/store.hpp"
#include "urbanscore/resilience/cache.hpp"
#include "urbanscore/resilience/gateway.hpp"
#include "urbanscore/scoring/scoring.hpp"
#include "urbanscore/service/engine.hpp"

namespace urbanscore::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path data_dir();
std::filesystem::path source_dir();

/// Tineretului reference point and the other recorded points.
inline const GeoPoint kCenter{44.4108, 26.1084};
inline const GeoPoint kPark{44.4046, 26.1057};
inline const GeoPoint kEmpty{44.3, 26.0};
inline const GeoPoint kOcean{44.0, 31.0};
inline const std::string kAddress = "Tineretului, Sector 4, București";
inline const std::string kUnparseable = "zzzz qqqq 00000";

/// Unique directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Call counter, injected latency and an outage switch for one provider.
struct StubControl {
  std::atomic<int> calls{0};
  std::atomic<int> delay_ms{0};
  std::atomic<bool> down{false};

  /// Counts the call, sleeps, then throws ProviderUnavailable when down.
  void enter(const char* provider);
};

struct StubControls {
  StubControl geocode;
  StubControl facilities;
  StubControl traffic;
  StubControl air;

  int total_calls() const;
};

/// Wraps real providers with the controls.
geodata::Providers instrument(const geodata::Providers& inner, std::shared_ptr<StubControls> controls);

/// Providers answering any point with fixed, plausible data.
geodata::Providers synthetic_providers();

/// Replay providers over the checked-in recordings.
geodata::Providers fixture_providers();

/// Text generator returning a scripted reply after an optional delay.
class ScriptedGenerator final : public explain::TextGenerator {
 public:
  explicit ScriptedGenerator(std::string reply, std::chrono::milliseconds delay = {})
      : reply_(std::move(reply)), delay_(delay) {}

  std::string generate(const std::string& prompt, const std::string& locale) override;

  void set_reply(std::string reply);
  void set_failing(bool failing) { failing_ = failing; }
  int calls() const { return calls_; }
  std::string last_prompt() const;

 private:
  mutable std::mutex mu_;
  std::string reply_;
  std::string last_prompt_;
  std::chrono::milliseconds delay_;
  std::atomic<bool> failing_{false};
  std::atomic<int> calls_{0};
};

struct HarnessOptions {
  bool synthetic = false;
  /// "file" or "sqlite"; path ":memory:" unless storage_path is set.
  std::string backend = "file";
  std::string storage_path = ":memory:";
  std::shared_ptr<explain::TextGenerator> remote;
  std::chrono::seconds explain_ttl = std::chrono::hours(24);
  std::shared_ptr<resilience::SharedCache> shared_cache;
  /// Uses a ManualClock when true, the system clock otherwise.
  bool manual_clock = true;
  scoring::CalibrationConstants calibration;
};

struct Harness {
  std::shared_ptr<ManualClock> manual_clock;  // null with the system clock
  std::shared_ptr<const Clock> clock;
  std::shared_ptr<StubControls> controls;
  std::shared_ptr<persistence::Store> store;
  std::shared_ptr<resilience::ResilientGateway> gateway;
  std::unique_ptr<service::Engine> engine;

  void advance(std::chrono::microseconds d) { manual_clock->advance(d); }
};

/// Gateway retries do not sleep in the harness.
Harness make_harness(const HarnessOptions& options = {});

/// 2024-05-14T09:00:00Z, the fixture recording time.
Timestamp fixture_epoch();

/// Calibrated constants frozen in config/urbanscore.conf.
scoring::CalibrationConstants frozen_calibration();

/// Window of the synthetic statistics corpus.
struct StatsCorpus {
  Timestamp since;
  Timestamp until;
};

/// Writes 100 in-window queries (ten districts with 8,7,7,6,6,6,5,5,4,4 and
/// 21 more with 2 each), a few queries outside the window, and 100 profiles
/// (52 residence, 31 investment, 17 short_term). Expected preference order:
/// lifestyle, education, metro, surface, air, traffic.
StatsCorpus seed_stats_corpus(persistence::Store& store, ManualClock& clock);

}  // namespace urbanscore::testing
