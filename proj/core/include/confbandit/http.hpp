#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace confbandit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Raised by a transport when no HTTP response was obtained at all.
class TransportFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimal POST-only transport so the live environment can be driven by a
/// fake in tests.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport. https URLs require an OpenSSL-enabled build.
std::unique_ptr<HttpTransport> make_http_transport();

/// Exponential backoff: attempt, then up to `max_retries` retries waiting
/// initial_backoff * multiplier^i before retry i.
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds timeout{60000};
  // Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// POSTs `body` as JSON and parses a JSON reply. Retries on transport
/// failures, HTTP 429 and 5xx. Throws EnvironmentError once retries are
/// exhausted or on any other non-2xx status, FormatError on an unparsable reply.
nlohmann::json post_json(HttpTransport& transport, const std::string& url,
                         const nlohmann::json& body, std::string_view api_key,
                         const RetryPolicy& retry, std::string_view what);

}  // namespace confbandit
