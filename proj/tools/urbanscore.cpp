#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/geodata/facilities.hpp"
#include "urbanscore/geodata/providers.hpp"
#include "urbanscore/resilience/cache.hpp"
#include "urbanscore/scoring/calibration.hpp"
#include "urbanscore/service/codec.hpp"
#include "urbanscore/service/engine.hpp"
#include "urbanscore/service/http_api.hpp"
#include "urbanscore/service/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace urbanscore;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string fixtures;
  std::string storage_path;
  std::string log_level;
};

Config load_config(const CommonOptions& o) {
  Config cfg = o.config_path.empty() ? Config::defaults() : Config::load(o.config_path);
  cfg.apply_env();
  if (!o.fixtures.empty()) {
    cfg.set("providers.mode", "fixtures");
    cfg.set("providers.fixtures_dir", o.fixtures);
  }
  if (!o.storage_path.empty()) cfg.set("storage.path", o.storage_path);
  const std::string level = o.log_level.empty() ? cfg.get_string("log.level", "info") : o.log_level;
  spdlog::set_level(spdlog::level::from_str(level));
  return cfg;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read " + path.string());
  return json::parse(in);
}

std::optional<GeoPoint> parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  try {
    return GeoPoint::make(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct TargetOptions {
  std::string target;
  double radius_m = 0.0;
  std::vector<double> weights;
  bool traffic_sensitive = false;
  std::string user;
  std::string locale;
};

void add_target_options(CLI::App* cmd, TargetOptions& t) {
  cmd->add_option("target", t.target, "Address, or \"lat,lon\"; defaults to <fixtures>/request.json");
  cmd->add_option("-r,--radius", t.radius_m, "Search radius in metres")->check(CLI::Range(100.0, 5000.0));
  cmd->add_option("-w,--weights", t.weights, "Six weights: air traffic lifestyle education metro surface")
      ->expected(6)
      ->delimiter(',');
  cmd->add_flag("--traffic-sensitive", t.traffic_sensitive, "Boost the traffic weight");
  cmd->add_option("-u,--user", t.user, "Use the stored profile of this user");
  cmd->add_option("-l,--locale", t.locale, "Explanation locale (ro, en)");
}

service::EvaluateRequest build_request(const TargetOptions& t, const CommonOptions& common) {
  service::EvaluateRequest r;
  if (t.target.empty()) {
    if (common.fixtures.empty()) fail(ErrorCode::InvalidRequest, "give an address or lat,lon");
    r = service::evaluate_request_from_json(read_json(fs::path(common.fixtures) / "request.json"));
  } else if (auto p = parse_point(t.target)) {
    r.point = *p;
  } else {
    r.address = t.target;
  }
  if (t.radius_m > 0.0) r.radius_m = t.radius_m;
  if (!t.weights.empty()) {
    scoring::PreferenceProfile profile;
    std::copy(t.weights.begin(), t.weights.end(), profile.weights.begin());
    profile.traffic_sensitive = t.traffic_sensitive;
    r.profile = profile;
  } else if (t.traffic_sensitive) {
    r.profile = scoring::PreferenceProfile{scoring::kDefaultWeights, true};
  }
  if (!t.user.empty()) r.user_id = t.user;
  if (!t.locale.empty()) r.locale = t.locale;
  r.validate();
  return r;
}

void print_report(const service::ScoreReport& r) {
  fmt::print("{}\n", r.location.display_name.empty() ? r.location.point.to_string() : r.location.display_name);
  fmt::print("  location id  {}\n", r.location_id);
  for (auto c : scoring::kAllComponents) {
    fmt::print("  {:<10} {:6.2f}  (weight {:.3f})\n", scoring::to_string(c), r.sub_scores.get(c),
               r.weights[static_cast<std::size_t>(c)]);
  }
  fmt::print("  aggregate    {}\n", r.aggregate);
  std::string degraded;
  for (auto f : r.degraded) degraded += (degraded.empty() ? "" : ", ") + std::string(resilience::to_string(f));
  fmt::print("  degraded     {}\n", degraded.empty() ? "none" : degraded);
  fmt::print("  total        {:.1f} ms\n", r.timings.at("total"));
  fmt::print("\n{}\n", r.explanation.text);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

int run_evaluate(const CommonOptions& common, const TargetOptions& t, bool as_json) {
  const Config cfg = load_config(common);
  auto engine = service::make_engine(cfg, std::make_shared<SystemClock>());
  const auto report = engine->evaluate(build_request(t, common));
  if (as_json) {
    std::cout << service::to_json(report).dump(2) << "\n";
  } else {
    print_report(report);
  }
  return 0;
}

int run_batch(const CommonOptions& common, const TargetOptions& t, int count) {
  const Config cfg = load_config(common);
  auto engine = service::make_engine(cfg, std::make_shared<SystemClock>());
  const auto request = build_request(t, common);
  std::vector<double> totals;
  int degraded = 0;
  for (int i = 0; i < count; ++i) {
    const auto report = engine->evaluate(request);
    totals.push_back(report.timings.at("total"));
    if (!report.degraded.empty()) ++degraded;
  }
  fmt::print("runs {}  median {:.1f} ms  p95 {:.1f} ms  max {:.1f} ms  degraded {}\n", count,
             percentile(totals, 0.5), percentile(totals, 0.95), *std::max_element(totals.begin(), totals.end()),
             degraded);
  return 0;
}

int run_calibrate(const CommonOptions& common, const std::string& targets_path, const std::string& out_path) {
  if (common.fixtures.empty()) fail(ErrorCode::InvalidArgument, "calibrate needs --fixtures");
  const Config cfg = load_config(common);
  auto providers = geodata::make_providers(cfg, std::make_shared<SystemClock>());
  const auto request = service::evaluate_request_from_json(read_json(fs::path(common.fixtures) / "request.json"));
  const GeoPoint center =
      request.point ? *request.point : providers.geocoding->forward(*request.address).point;
  const auto facilities = geodata::dedupe_facilities(providers.facilities->fetch(center, request.radius_m));
  const auto summary = geodata::summarize_facilities(facilities, center);

  const json t = read_json(targets_path.empty() ? fs::path(common.fixtures) / "targets.json" : fs::path(targets_path));
  scoring::CalibrationTargets targets;
  auto target = [&](const char* key) -> std::optional<double> {
    if (t.contains(key)) return t.at(key).get<double>();
    return std::nullopt;
  };
  targets.lifestyle = target("lifestyle");
  targets.education = target("education");
  targets.surface = target("surface");
  targets.metro = target("metro");

  const auto result = scoring::calibrate({{scoring::CalibrationInputs::from_summary(summary), targets}},
                                         scoring::calibration_from(cfg));
  const auto& fitted = result.fitted.front();
  fmt::print("lifestyle {:.2f}  education {:.2f}  surface {:.2f}  metro {:.2f}  (squared error {:.4f})\n",
             fitted.lifestyle, fitted.education, fitted.surface, fitted.metro, result.squared_error);

  Config out;
  if (!out_path.empty() && fs::exists(out_path)) {
    std::ifstream in(out_path);
    std::stringstream buf;
    buf << in.rdbuf();
    out = Config::parse(buf.str());
  }
  scoring::store_calibration(out, result.constants);
  if (out_path.empty()) {
    std::cout << out.dump();
  } else {
    out.save(out_path);
    fmt::print("wrote {}\n", out_path);
  }
  return 0;
}

std::sig_atomic_t volatile g_stop = 0;

int run_serve(const CommonOptions& common, const std::string& bind, int port, const std::string& cors) {
  const Config cfg = load_config(common);
  auto engine = service::make_engine(cfg, std::make_shared<SystemClock>());
  service::HttpApi api(*engine, service::ApiOptions{cors});
  const std::string host = bind.empty() ? cfg.get_string("server.bind", "0.0.0.0") : bind;
  const int p = port >= 0 ? port : static_cast<int>(cfg.get_int("server.port", 8080));
  spdlog::info("listening on {}:{}", host, p);
  api.run(host, p);
  return 0;
}

int run_kv_serve(const std::string& bind, int port) {
  resilience::KvServer server(std::make_shared<SystemClock>());
  spdlog::info("shared cache listening on {}:{}", bind, port);
  server.run(bind, port);
  return 0;
}

int run_stats(const CommonOptions& common, const std::string& since, const std::string& until) {
  const Config cfg = load_config(common);
  auto store = persistence::make_store(cfg, std::make_shared<SystemClock>());
  auto parse = [](const std::string& text, Timestamp fallback) {
    if (text.empty()) return fallback;
    auto t = parse_iso8601(text);
    if (!t) fail(ErrorCode::InvalidArgument, "timestamps must be ISO-8601 UTC: " + text);
    return *t;
  };
  const auto report = service::compute_stats(*store, parse(since, Timestamp{}),
                                             parse(until, from_micros(std::numeric_limits<std::int64_t>::max())));
  std::cout << service::to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighbourhood liveability scoring"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("-c,--config", common.config_path, "Configuration file (key = value)")->check(CLI::ExistingFile);
  app.add_option("-f,--fixtures", common.fixtures, "Replay provider recordings from this directory")
      ->check(CLI::ExistingDirectory);
  app.add_option("-s,--storage", common.storage_path, "Storage path (overrides storage.path)");
  app.add_option("--log-level", common.log_level, "trace, debug, info, warn, error");

  TargetOptions eval_target;
  bool eval_json = false;
  auto* evaluate = app.add_subcommand("evaluate", "Score one address or point");
  add_target_options(evaluate, eval_target);
  evaluate->add_flag("--json", eval_json, "Print the full report as JSON");

  TargetOptions batch_target;
  int batch_count = 20;
  auto* batch = app.add_subcommand("batch", "Evaluate repeatedly and report latency percentiles");
  add_target_options(batch, batch_target);
  batch->add_option("-n,--count", batch_count, "Number of evaluations")->check(CLI::PositiveNumber);

  std::string targets_path;
  std::string calibrate_out;
  auto* calibrate = app.add_subcommand("calibrate", "Fit scoring constants to reference sub-scores");
  calibrate->add_option("-t,--targets", targets_path, "Target sub-scores (JSON); defaults to <fixtures>/targets.json");
  calibrate->add_option("-o,--out", calibrate_out, "Config file to update; prints to stdout when omitted");

  std::string bind;
  int port = -1;
  std::string cors;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("-b,--bind", bind, "Bind address");
  serve->add_option("-p,--port", port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--cors-origin", cors, "Allowed cross-origin caller");

  std::string kv_bind = "127.0.0.1";
  int kv_port = 6380;
  auto* kv = app.add_subcommand("kv-serve", "Run the shared cache server");
  kv->add_option("-b,--bind", kv_bind, "Bind address");
  kv->add_option("-p,--port", kv_port, "Port")->check(CLI::Range(1, 65535));

  std::string since;
  std::string until;
  auto* stats = app.add_subcommand("stats", "Aggregate query statistics from storage");
  stats->add_option("--since", since, "Inclusive start (ISO-8601 UTC)");
  stats->add_option("--until", until, "Exclusive end (ISO-8601 UTC)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) return run_evaluate(common, eval_target, eval_json);
    if (*batch) return run_batch(common, batch_target, batch_count);
    if (*calibrate) return run_calibrate(common, targets_path, calibrate_out);
    if (*serve) return run_serve(common, bind, port, cors);
    if (*kv) return run_kv_serve(kv_bind, kv_port);
    if (*stats) return run_stats(common, since, until);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
