#include "urbanscore/explain/explain.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "urbanscore/config.hpp"
#include "urbanscore/error.hpp"
#include "urbanscore/resilience/cache.hpp"

namespace urbanscore::explain {

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::Remote: return "remote";
    case Source::Template: return "template";
  }
  return "unknown";
}

// --- payload ---------------------------------------------------------------

void ExplainPayload::validate() const {
  require(sub_scores.valid(), "payload sub-scores must be within [0, 100]");
  require(aggregate >= 0 && aggregate <= 100, "payload aggregate must be within [0, 100]");
  require(top_facilities.size() <= kMaxTopFacilities, "payload carries at most 10 facilities");
  for (const auto& f : top_facilities)
    require(std::isfinite(f.distance_m) && f.distance_m >= 0.0, "facility distance must be >= 0");
  require(std::isfinite(radius_m) && radius_m > 0.0, "payload radius must be positive");
  require(!locale.empty(), "payload locale must not be empty");
}

nlohmann::ordered_json ExplainPayload::to_json() const {
  nlohmann::ordered_json sub;
  for (auto c : scoring::kAllComponents) sub[std::string(scoring::to_string(c))] = sub_scores.get(c);
  nlohmann::ordered_json facilities = nlohmann::ordered_json::array();
  for (const auto& f : top_facilities) {
    nlohmann::ordered_json item;
    item["name"] = f.name;
    item["category"] = std::string(geodata::to_string(f.category));
    item["distance_m"] = std::floor(f.distance_m + 0.5);
    facilities.push_back(std::move(item));
  }
  nlohmann::ordered_json out;
  out["sub_scores"] = std::move(sub);
  out["aggregate"] = aggregate;
  out["top_facilities"] = std::move(facilities);
  out["routes"] = routes;
  out["radius_m"] = radius_m;
  out["locale"] = locale;
  return out;
}

std::string profile_hash(const scoring::PreferenceProfile& profile) {
  std::string text;
  for (double w : profile.weights) text += fmt::format("{:.4f},", w);
  text += profile.traffic_sensitive ? "ts=1" : "ts=0";
  return resilience::short_hash(text);
}

std::string format_value(double value, std::string_view decimal_separator) {
  const double r = std::floor(value * 10.0 + 0.5) / 10.0;
  if (r == std::floor(r)) return fmt::format("{:.0f}", r);
  std::string s = fmt::format("{:.1f}", r);
  const auto dot = s.find('.');
  return s.substr(0, dot) + std::string(decimal_separator) + s.substr(dot + 1);
}

// --- template --------------------------------------------------------------

namespace {

std::string fill(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    const std::string marker = "{" + name + "}";
    for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker, pos + value.size()))
      text.replace(pos, marker.size(), value);
  }
  return text;
}

std::string band(int aggregate) {
  if (aggregate >= 80) return "excellent";
  if (aggregate >= 60) return "good";
  if (aggregate >= 40) return "mixed";
  return "poor";
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, p.string() + ": " + e.what());
  }
}

}  // namespace

TemplateRenderer::TemplateRenderer(const std::filesystem::path& data_dir, std::string default_locale)
    : default_locale_(std::move(default_locale)) {
  const auto dir = data_dir / "locales";
  require(std::filesystem::is_directory(dir), "missing locale directory " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    tables_[entry.path().stem().string()] = read_json(entry.path());
  }
  require(tables_.contains(default_locale_), "no string table for default locale " + default_locale_);
}

std::vector<std::string> TemplateRenderer::locales() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tables_) out.push_back(name);
  return out;
}

const nlohmann::json& TemplateRenderer::table(const std::string& locale) const {
  auto it = tables_.find(locale);
  if (it == tables_.end()) {
    // "en-GB" falls back to "en", anything else to the default locale.
    it = tables_.find(locale.substr(0, locale.find('-')));
    if (it == tables_.end()) it = tables_.find(default_locale_);
  }
  return it->second;
}

std::string TemplateRenderer::render_text(const ExplainPayload& payload) const {
  const auto& t = table(payload.locale);
  const std::string sep = t.at("decimal_separator").get<std::string>();
  auto component = [&](scoring::Component c) {
    return t.at("components").at(std::string(scoring::to_string(c))).get<std::string>();
  };

  std::vector<std::string> sentences;
  sentences.push_back(fill(t.at("overall").get<std::string>(),
                           {{"band", t.at("bands").at(band(payload.aggregate)).get<std::string>()},
                            {"aggregate", std::to_string(payload.aggregate)}}));

  scoring::Component best = scoring::Component::Air;
  scoring::Component worst = scoring::Component::Air;
  for (auto c : scoring::kAllComponents) {
    if (payload.sub_scores.get(c) > payload.sub_scores.get(best)) best = c;
    if (payload.sub_scores.get(c) < payload.sub_scores.get(worst)) worst = c;
  }
  const std::string best_value = format_value(payload.sub_scores.get(best), sep);
  const std::string worst_value = format_value(payload.sub_scores.get(worst), sep);
  if (best_value == worst_value) {
    sentences.push_back(fill(t.at("uniform").get<std::string>(), {{"value", best_value}}));
  } else {
    sentences.push_back(fill(t.at("extremes").get<std::string>(), {{"best", component(best)},
                                                                   {"best_value", best_value},
                                                                   {"worst", component(worst)},
                                                                   {"worst_value", worst_value}}));
  }

  std::vector<TopFacility> nearest = payload.top_facilities;
  std::stable_sort(nearest.begin(), nearest.end(),
                   [](const auto& a, const auto& b) { return a.distance_m < b.distance_m; });
  if (nearest.size() > 3) nearest.resize(3);
  if (!nearest.empty()) {
    std::vector<std::string> items;
    for (const auto& f : nearest) {
      const std::string label =
          f.name.empty() ? t.at("categories").at(std::string(geodata::to_string(f.category))).get<std::string>()
                         : f.name;
      items.push_back(fill(t.at("item").get<std::string>(),
                           {{"name", label}, {"distance", fmt::format("{:.0f}", std::floor(f.distance_m + 0.5))}}));
    }
    std::string joined = items.front();
    for (std::size_t i = 1; i < items.size(); ++i)
      joined += (i + 1 == items.size() ? t.at("list_last") : t.at("list_separator")).get<std::string>() + items[i];
    sentences.push_back(fill(t.at("nearby").get<std::string>(), {{"items", joined}}));
  }

  std::string text;
  for (const auto& s : sentences) text += (text.empty() ? "" : " ") + s;
  return text;
}

Explanation TemplateRenderer::render(const ExplainPayload& payload, Timestamp now) const {
  Explanation e;
  e.text = render_text(payload);
  e.word_count = count_words(e.text);
  e.source = Source::Template;
  e.grounded = ground_check(e.text, payload).grounded;
  e.generated_at = now;
  return e;
}

// --- explainer -------------------------------------------------------------

Explainer::Explainer(std::shared_ptr<const Clock> clock, TemplateRenderer renderer,
                     std::shared_ptr<TextGenerator> remote, std::string prompt_template, std::chrono::seconds ttl)
    : clock_(std::move(clock)),
      renderer_(std::move(renderer)),
      remote_(std::move(remote)),
      prompt_template_(std::move(prompt_template)),
      ttl_(ttl) {
  require(ttl_.count() > 0, "explanation cache TTL must be positive");
  if (remote_) require(!prompt_template_.empty(), "remote explanations need a prompt template");
}

ExplainerStats Explainer::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

Explanation Explainer::get_explanation(std::int64_t location_id, const ExplainPayload& payload,
                                       const scoring::PreferenceProfile& profile) {
  payload.validate();
  const Key key{location_id, profile_hash(profile)};
  std::promise<Explanation> promise;
  {
    std::unique_lock lock(mu_);
    ++stats_.requests;
    if (auto it = cache_.find(key); it != cache_.end() && clock_->now() < it->second.expires_at) {
      ++stats_.cache_hits;
      return it->second.explanation;
    }
    if (auto it = flights_.find(key); it != flights_.end()) {
      auto future = it->second;
      ++stats_.cache_hits;
      lock.unlock();
      return future.get();
    }
    flights_.emplace(key, promise.get_future().share());
  }

  Explanation e;
  try {
    e = generate(payload);
  } catch (...) {
    std::lock_guard lock(mu_);
    promise.set_exception(std::current_exception());
    flights_.erase(key);
    throw;
  }
  std::lock_guard lock(mu_);
  cache_[key] = Cached{e, e.generated_at + ttl_};
  promise.set_value(e);
  flights_.erase(key);
  return e;
}

Explanation Explainer::generate(const ExplainPayload& payload) {
  if (remote_) {
    const std::string prompt = render_prompt(prompt_template_, payload);
    for (int attempt = 0; attempt < 2; ++attempt) {
      {
        std::lock_guard lock(mu_);
        ++stats_.remote_calls;
      }
      std::string text;
      try {
        text = remote_->generate(prompt, payload.locale);
      } catch (const std::exception& ex) {
        spdlog::warn("remote explanation failed, using template: {}", ex.what());
        break;
      }
      const auto first = text.find_first_not_of(" \t\r\n");
      const auto last = text.find_last_not_of(" \t\r\n");
      text = first == std::string::npos ? std::string{} : text.substr(first, last - first + 1);
      const int words = count_words(text);
      const auto grounding = ground_check(text, payload);
      if (words > 0 && words <= kMaxWords && grounding.grounded) {
        return Explanation{text, words, Source::Remote, true, clock_->now()};
      }
      spdlog::warn("remote explanation rejected (words={}, ungrounded={})", words,
                   fmt::format("{}", fmt::join(grounding.ungrounded, " ")));
    }
    std::lock_guard lock(mu_);
    ++stats_.fallbacks;
  }
  return renderer_.render(payload, clock_->now());
}

std::unique_ptr<Explainer> make_explainer(const Config& cfg, std::shared_ptr<const Clock> clock) {
  const std::filesystem::path data_dir = cfg.get_string("explain.data_dir", URBANSCORE_DATA_DIR);
  TemplateRenderer renderer(data_dir, cfg.get_string("explain.locale", "ro"));
  std::shared_ptr<TextGenerator> remote;
  std::string prompt;
  const std::string url = cfg.get_string("explain.url");
  if (!url.empty()) {
    std::ifstream in(data_dir / "prompt.txt");
    require(static_cast<bool>(in), "missing prompt template in " + data_dir.string());
    std::stringstream ss;
    ss << in.rdbuf();
    prompt = ss.str();
    remote = std::make_shared<ChatCompletionClient>(url, cfg.get_string("explain.key"),
                                                    cfg.get_string("explain.model", "gpt-4o-mini"));
  }
  return std::make_unique<Explainer>(std::move(clock), std::move(renderer), std::move(remote), std::move(prompt),
                                     std::chrono::seconds(cfg.get_int("explain.cache_ttl_s", 86400)));
}

}  // namespace urbanscore::explain
