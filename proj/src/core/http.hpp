#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace cryptaudit::http {

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs body to url ("http[s]://host[:port]/path"). Throws ProviderError
// (transient) when the connection fails; HTTP error statuses are returned.
Response post(const std::string& url, const std::string& body, const std::string& content_type,
              const Headers& headers, std::chrono::seconds timeout, const std::string& tag);

// 408, 429 and 5xx are worth retrying.
bool is_transient_status(int status);

}  // namespace cryptaudit::http
