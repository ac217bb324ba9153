#include "confbandit/http.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>

#include "confbandit/errors.hpp"

namespace confbandit {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(parts.path, h, body, "application/json");
    if (!result) {
      throw TransportFailure("POST " + url + " failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

nlohmann::json post_json(HttpTransport& transport, const std::string& url,
                         const nlohmann::json& body, std::string_view api_key,
                         const RetryPolicy& retry, std::string_view what) {
  if (url.empty()) throw ValidationError(std::string(what) + ": endpoint URL is not configured");
  HttpHeaders headers{{"Accept", "application/json"}};
  if (!api_key.empty()) headers.emplace_back("Authorization", "Bearer " + std::string(api_key));
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto wait = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(retry.initial_backoff.count()) *
          std::pow(retry.multiplier, attempt - 1)));
      if (retry.sleep) {
        retry.sleep(wait);
      } else {
        std::this_thread::sleep_for(wait);
      }
    }
    HttpResponse response;
    try {
      response = transport.post(url, payload, headers, retry.timeout);
    } catch (const TransportFailure& e) {
      last_error = e.what();
      continue;
    }
    if (response.status == 429 || response.status >= 500) {
      last_error = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      throw EnvironmentError(std::string(what) + ": HTTP " + std::to_string(response.status) +
                             " from " + url);
    }
    try {
      return nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string(what) + ": unparsable reply: " + e.what());
    }
  }
  throw EnvironmentError(std::string(what) + ": giving up after " +
                         std::to_string(retry.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace confbandit
