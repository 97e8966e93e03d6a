#include "http.hpp"

#include <httplib.h>

#include "errors.hpp"

namespace cryptaudit::http {

namespace {

std::pair<std::string, std::string> split_url(const std::string& url, const std::string& tag) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ProviderError(tag, "endpoint '" + url + "' lacks a scheme");
  }
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace

bool is_transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

Response post(const std::string& url, const std::string& body, const std::string& content_type,
              const Headers& headers, std::chrono::seconds timeout, const std::string& tag) {
  auto [base, path] = split_url(url, tag);
  httplib::Client client(base);
  if (!client.is_valid()) throw ProviderError(tag, "unsupported endpoint '" + url + "'");
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  auto result = client.Post(path, hdrs, body, content_type);
  if (!result) {
    throw ProviderError(tag, "request to " + url + " failed: " + httplib::to_string(result.error()),
                        /*transient=*/true);
  }
  return {result->status, result->body};
}

}  // namespace cryptaudit::http
