#include <httplib.h>
#include <spdlog/spdlog.h>

#include "urbanscore/error.hpp"
#include "urbanscore/explain/explain.hpp"
#include "urbanscore/geodata/transport.hpp"

namespace urbanscore::explain {

std::string redact(std::string_view text, std::string_view secret) {
  std::string out(text);
  if (secret.empty()) return out;
  for (auto pos = out.find(secret); pos != std::string::npos; pos = out.find(secret, pos + 3))
    out.replace(pos, secret.size(), "***");
  return out;
}

std::string render_prompt(std::string_view prompt_template, const ExplainPayload& payload) {
  std::string out(prompt_template);
  auto substitute = [&](std::string_view name, const std::string& value) {
    const std::string marker = "{{" + std::string(name) + "}}";
    for (auto pos = out.find(marker); pos != std::string::npos; pos = out.find(marker, pos + value.size()))
      out.replace(pos, marker.size(), value);
  };
  substitute("payload", payload.canonical());
  substitute("locale", payload.locale);
  substitute("words", std::to_string(kTargetWords));
  return out;
}

ChatCompletionClient::ChatCompletionClient(std::string url, std::string api_key, std::string model,
                                           std::chrono::milliseconds timeout)
    : url_(std::move(url)), api_key_(std::move(api_key)), model_(std::move(model)), timeout_(timeout) {}

nlohmann::json ChatCompletionClient::request_body(const std::string& model, const std::string& prompt) {
  return {{"model", model},
          {"temperature", 0.2},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
}

std::string ChatCompletionClient::parse_reply(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::MalformedResponse, std::string("completion reply is not JSON: ") + e.what());
  }
  const auto* content = &doc;
  try {
    content = &doc.at("choices").at(0).at("message").at("content");
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::MalformedResponse, "completion reply has no choices[0].message.content");
  }
  if (!content->is_string()) fail(ErrorCode::MalformedResponse, "completion content is not text");
  return content->get<std::string>();
}

std::string ChatCompletionClient::generate(const std::string& prompt, const std::string& locale) {
  const auto [host, path] = geodata::split_base_url(url_);
  httplib::Client client(host);
  const auto s = timeout_.count() / 1000;
  const auto us = (timeout_.count() % 1000) * 1000;
  client.set_connection_timeout(s, us);
  client.set_read_timeout(s, us);
  httplib::Headers headers{{"User-Agent", std::string(geodata::kUserAgent)}};
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const std::string body = request_body(model_, prompt).dump();
  spdlog::info("explain request url={} locale={} auth={} body={}", url_, locale,
               api_key_.empty() ? "none" : "Bearer ***", redact(body, api_key_));
  auto res = client.Post(path.empty() ? "/" : path, headers, body, "application/json");
  if (!res) fail(ErrorCode::ProviderUnavailable, "completion endpoint unreachable: " + httplib::to_string(res.error()));
  spdlog::info("explain response status={} body={}", res->status, redact(res->body, api_key_));
  if (res->status / 100 != 2)
    fail(ErrorCode::ProviderUnavailable, "completion endpoint HTTP " + std::to_string(res->status));
  return parse_reply(res->body);
}

}  // namespace urbanscore::explain
