#include "dap/remote.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "dap/error.hpp"

namespace dap {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::InvalidArgument, "endpoint URL needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

struct JsonEndpoint::Impl {
  SplitUrl target;
  std::mutex mu;
  std::condition_variable cv;
  std::size_t in_flight = 0;
};

JsonEndpoint::JsonEndpoint(RemoteConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
  if (config_.retries < 0) config_.retries = 0;
  impl_->target = split_url(config_.url);
}

JsonEndpoint::~JsonEndpoint() = default;

nlohmann::json JsonEndpoint::post(const nlohmann::json& body) const {
  {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->in_flight < config_.max_in_flight; });
    ++impl_->in_flight;
  }
  struct Release {
    Impl& impl;
    ~Release() {
      {
        std::lock_guard lock(impl.mu);
        --impl.in_flight;
      }
      impl.cv.notify_one();
    }
  } release{*impl_};

  const std::string payload = body.dump();
  auto delay = config_.backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(impl_->target.origin);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = client.Post(impl_->target.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      last_error = "response is not valid JSON";
      continue;
    }
    return parsed;
  }
  throw Error(ErrorKind::RemoteFailure, config_.url + " failed after " +
                                            std::to_string(config_.retries + 1) + " attempts (" +
                                            last_error + ")");
}

}  // namespace dap
