#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace urbanscore::geodata {

/// Sent on every outbound request (OSM usage policy requires identification).
inline constexpr std::string_view kUserAgent = "UrbanScoreApp/1.0";

struct HttpRequest {
  std::string method = "GET";
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string path;      // appended to the base prefix
  std::vector<std::pair<std::string, std::string>> query;
  std::string body;
  std::string content_type;
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws Error(ProviderUnavailable) when no response could be obtained.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport. Always sets `User-Agent: UrbanScoreApp/1.0`.
class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout = std::chrono::seconds(5))
      : timeout_(timeout) {}

  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::milliseconds timeout_;
};

/// Splits "https://host:8080/api/x" into {"https://host:8080", "/api/x"}.
std::pair<std::string, std::string> split_base_url(std::string_view url);

/// Percent-encodes a query component.
std::string url_encode(std::string_view s);

}  // namespace urbanscore::geodata
