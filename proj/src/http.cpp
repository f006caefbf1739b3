#include "ideajudge/http.hpp"

#include <chrono>
#include <cstdlib>
#include <optional>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ideajudge/errors.hpp"

namespace ideajudge {

HttpTransport default_http_transport() {
  return [](const HttpRequest& req) -> HttpResponse {
    httplib::Client client(req.base_url);
    if (!client.is_valid()) throw TransportError("invalid endpoint '" + req.base_url + "'");
    auto secs = std::chrono::duration<double>(req.timeout_seconds);
    auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(req.path, headers, req.body, "application/json");
    if (!res) {
      auto err = res.error();
      auto elapsed = std::chrono::steady_clock::now() - started;
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= timeout)) {
        throw TimeoutError("request to " + req.base_url + req.path + " timed out");
      }
      throw TransportError("request to " + req.base_url + req.path +
                           " failed: " + httplib::to_string(err));
    }
    return {res->status, res->body};
  };
}

HttpResponse post_with_retries(const HttpTransport& transport, const HttpRequest& request,
                               const RetryPolicy& policy) {
  auto delay = policy.backoff;
  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 0;; ++attempt) {
    std::optional<HttpResponse> res;
    try {
      res = transport(request);
    } catch (const TimeoutError& e) {
      last_error = e.what();
      last_was_timeout = true;
    } catch (const TransportError& e) {
      last_error = e.what();
      last_was_timeout = false;
    }
    if (res) {
      if (res->status >= 200 && res->status < 300) return *res;
      last_error = "HTTP " + std::to_string(res->status) + " from " + request.base_url +
                   request.path;
      last_was_timeout = false;
      if (res->status != 429 && res->status < 500) throw TransportError(last_error);
    }
    if (attempt >= policy.max_retries) break;
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
  std::string msg = "giving up after " + std::to_string(policy.max_retries + 1) +
                    " attempts: " + last_error;
  if (last_was_timeout) throw TimeoutError(msg);
  throw TransportError(msg);
}

std::vector<std::pair<std::string, std::string>> bearer_headers(const std::string& env_var) {
  std::vector<std::pair<std::string, std::string>> out;
  if (env_var.empty()) return out;
  if (const char* key = std::getenv(env_var.c_str()); key && *key) {
    out.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  return out;
}

}  // namespace ideajudge
