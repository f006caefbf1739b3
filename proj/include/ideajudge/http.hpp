#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ideajudge {

struct HttpRequest {
  std::string base_url;  // scheme://host[:port]
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_seconds = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Sends one POST. Throws TransportError when no response arrives and
/// TimeoutError when the deadline passes; HTTP error statuses are returned.
using HttpTransport = std::function<HttpResponse(const HttpRequest&)>;

HttpTransport default_http_transport();

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled after every attempt
};

/// POST with exponential backoff on transport failures, timeouts, 429 and 5xx.
/// Returns the first 2xx response. Other 4xx statuses fail immediately.
HttpResponse post_with_retries(const HttpTransport& transport, const HttpRequest& request,
                               const RetryPolicy& policy);

/// Bearer header from the named environment variable; nothing if unset.
std::vector<std::pair<std::string, std::string>> bearer_headers(const std::string& env_var);

}  // namespace ideajudge
