#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include <json.hpp>

namespace dap {

struct RemoteConfig {
  std::string url;
  double timeout_seconds = 30.0;
  int retries = 3;
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
  std::size_t max_in_flight = 4;
};

// POSTs JSON bodies to one endpoint. A request succeeds only on status 200
// with a parseable JSON body; anything else is retried `retries` times with
// exponential backoff and then raised as RemoteFailure. Concurrent callers
// are bounded by `max_in_flight`.
class JsonEndpoint {
 public:
  explicit JsonEndpoint(RemoteConfig config);
  ~JsonEndpoint();
  JsonEndpoint(const JsonEndpoint&) = delete;
  JsonEndpoint& operator=(const JsonEndpoint&) = delete;

  nlohmann::json post(const nlohmann::json& body) const;
  const RemoteConfig& config() const noexcept { return config_; }

 private:
  struct Impl;
  RemoteConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dap
