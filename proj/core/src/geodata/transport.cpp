#include "urbanscore/geodata/transport.hpp"

#include <httplib.h>

#include <cctype>
#include <fmt/format.h>

#include "urbanscore/error.hpp"

namespace urbanscore::geodata {

std::pair<std::string, std::string> split_base_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string_view::npos) return {std::string(url), std::string{}};
  std::string prefix(url.substr(slash));
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {std::string(url.substr(0, slash)), prefix};
}

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out.push_back(static_cast<char>(ch));
    } else {
      out += fmt::format("%{:02X}", ch);
    }
  }
  return out;
}

HttpResponse HttplibTransport::send(const HttpRequest& request) {
  const auto [host, prefix] = split_base_url(request.base_url);
  std::string target = prefix + request.path;
  if (target.empty()) target = "/";
  if (!request.query.empty()) {
    char sep = '?';
    for (const auto& [k, v] : request.query) {
      target += sep;
      target += url_encode(k) + "=" + url_encode(v);
      sep = '&';
    }
  }

  httplib::Client client(host);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers{{"User-Agent", std::string(kUserAgent)}};
  for (const auto& [k, v] : request.headers) {
    if (k != "User-Agent") headers.emplace(k, v);
  }

  httplib::Result res;
  if (request.method == "GET") {
    res = client.Get(target, headers);
  } else if (request.method == "POST") {
    res = client.Post(target, headers, request.body,
                      request.content_type.empty() ? "application/octet-stream"
                                                   : request.content_type);
  } else {
    fail(ErrorCode::InvalidArgument, "unsupported method " + request.method);
  }
  if (!res) {
    fail(ErrorCode::ProviderUnavailable,
         fmt::format("{} {}: {}", request.method, host, httplib::to_string(res.error())));
  }
  return HttpResponse{res->status, res->body};
}

}  // namespace urbanscore::geodata
