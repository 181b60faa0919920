#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbanscore/clock.hpp"
#include "urbanscore/geodata/types.hpp"
#include "urbanscore/scoring/scoring.hpp"

namespace urbanscore {
class Config;
}

namespace urbanscore::explain {

inline constexpr int kMaxWords = 80;
inline constexpr int kTargetWords = 60;
inline constexpr std::size_t kMaxTopFacilities = 10;

struct TopFacility {
  std::string name;
  geodata::FacilityCategory category;
  double distance_m;
};

struct ExplainPayload {
  scoring::SubScores sub_scores;
  int aggregate = 0;
  /// Nearest first, at most kMaxTopFacilities.
  std::vector<TopFacility> top_facilities;
  /// Sorted route identifiers served by nearby stops.
  std::vector<std::string> routes;
  double radius_m = 800.0;
  std::string locale = "ro";

  void validate() const;
  /// Fixed key order, so equal payloads serialise to equal bytes.
  nlohmann::ordered_json to_json() const;
  std::string canonical() const { return to_json().dump(); }
};

enum class Source { Remote, Template };
std::string_view to_string(Source s) noexcept;

struct Explanation {
  std::string text;
  int word_count = 0;
  Source source = Source::Template;
  bool grounded = false;
  Timestamp generated_at;
};

/// First 16 hex digits of SHA-256 over the weights at 4 decimals and the
/// traffic-sensitivity flag.
std::string profile_hash(const scoring::PreferenceProfile& profile);

int count_words(std::string_view text);

struct GroundingResult {
  bool grounded = true;
  std::vector<std::string> ungrounded;
};

/// Lexical check: every number in `text` must match a payload number at one
/// decimal (integers also match payload values rounded to integers), and every
/// alphanumeric route-like token must be one of the payload routes. Facility
/// names are removed first; pollutant and unit symbols are accepted; a decimal
/// comma reads as a point.
GroundingResult ground_check(std::string_view text, const ExplainPayload& payload);

/// Per-locale sentence skeletons loaded from `<data_dir>/locales/<locale>.json`.
class TemplateRenderer {
 public:
  explicit TemplateRenderer(const std::filesystem::path& data_dir, std::string default_locale = "ro");

  /// Pure function of the payload: tone band of the aggregate, best and worst
  /// sub-score with values, up to three nearest facilities.
  std::string render_text(const ExplainPayload& payload) const;
  Explanation render(const ExplainPayload& payload, Timestamp now) const;
  std::vector<std::string> locales() const;

 private:
  const nlohmann::json& table(const std::string& locale) const;

  std::map<std::string, nlohmann::json> tables_;
  std::string default_locale_;
};

/// Formats a value with at most one decimal, using the locale's separator.
std::string format_value(double value, std::string_view decimal_separator);

/// Remote text generator; returns the generated text or throws.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string generate(const std::string& prompt, const std::string& locale) = 0;
};

/// Chat-completion wire client: POST <url> with {model, messages}, reply text
/// at choices[0].message.content.
class ChatCompletionClient final : public TextGenerator {
 public:
  ChatCompletionClient(std::string url, std::string api_key, std::string model,
                       std::chrono::milliseconds timeout = std::chrono::seconds(20));

  std::string generate(const std::string& prompt, const std::string& locale) override;

  static nlohmann::json request_body(const std::string& model, const std::string& prompt);
  static std::string parse_reply(const std::string& body);

 private:
  std::string url_;
  std::string api_key_;
  std::string model_;
  std::chrono::milliseconds timeout_;
};

/// Replaces `{{payload}}`, `{{locale}}` and `{{words}}` in the prompt template.
std::string render_prompt(std::string_view prompt_template, const ExplainPayload& payload);
std::string redact(std::string_view text, std::string_view secret);

struct ExplainerStats {
  std::uint64_t requests = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t remote_calls = 0;
  std::uint64_t fallbacks = 0;
};

/// Cached explanation service keyed by (location id, profile hash).
///
/// On a miss the remote generator is tried (one regeneration when the text is
/// too long or ungrounded), otherwise the template is used. Concurrent misses
/// on one key share a single generation.
class Explainer {
 public:
  Explainer(std::shared_ptr<const Clock> clock, TemplateRenderer renderer,
            std::shared_ptr<TextGenerator> remote = nullptr, std::string prompt_template = {},
            std::chrono::seconds ttl = std::chrono::hours(24));

  Explanation get_explanation(std::int64_t location_id, const ExplainPayload& payload,
                              const scoring::PreferenceProfile& profile);

  ExplainerStats stats() const;
  const TemplateRenderer& renderer() const { return renderer_; }

 private:
  using Key = std::pair<std::int64_t, std::string>;
  struct Cached {
    Explanation explanation;
    Timestamp expires_at;
  };

  Explanation generate(const ExplainPayload& payload);

  std::shared_ptr<const Clock> clock_;
  TemplateRenderer renderer_;
  std::shared_ptr<TextGenerator> remote_;
  std::string prompt_template_;
  std::chrono::seconds ttl_;

  mutable std::mutex mu_;
  std::map<Key, Cached> cache_;
  std::map<Key, std::shared_future<Explanation>> flights_;
  ExplainerStats stats_;
};

/// Template-only unless `explain.url` is set.
std::unique_ptr<Explainer> make_explainer(const Config& cfg, std::shared_ptr<const Clock> clock);

}  // namespace urbanscore::explain
