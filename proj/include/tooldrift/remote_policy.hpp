#pragma once

// HTTP completion-endpoint policy.
//
// POST <endpoint>  {"prompt": ..., "n": k, "temperature": t, "stop": ["Observation:"]}
// response         {"choices": [{"text": ...}, ...]}

#include <algorithm>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tooldrift/policy.hpp"
#include "tooldrift/react.hpp"

namespace tooldrift {

struct RemoteConfig {
  std::string endpoint;  // http://host[:port]/path
  double temperature = 0.7;
  std::chrono::milliseconds request_timeout{30000};
  int max_retries = 2;
  int max_in_flight = 4;
};

class RemotePolicy : public Policy {
 public:
  explicit RemotePolicy(RemoteConfig config)
      : config_(std::move(config)), slots_(std::make_unique<std::counting_semaphore<>>(std::max(config_.max_in_flight, 1))) {
    if (config_.max_in_flight < 1) throw PolicyError("max_in_flight must be positive");
    if (config_.temperature < 0) throw PolicyError("temperature must be non-negative");
    auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos) throw PolicyError("endpoint must be an http URL: " + config_.endpoint);
    auto path = config_.endpoint.find('/', scheme + 3);
    host_ = config_.endpoint.substr(0, path);
    path_ = path == std::string::npos ? "/" : config_.endpoint.substr(path);
  }

  std::vector<std::string> propose(const StateRecord& state, int k) const override {
    if (k < 1) throw PolicyError("k must be positive");
    nlohmann::json body = {{"prompt", render_prompt(state)},
                           {"n", k},
                           {"temperature", config_.temperature},
                           {"stop", {"Observation:"}}};
    std::string payload = body.dump();
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
      slots_->acquire();
      httplib::Result res = [&] {
        httplib::Client client(host_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        return client.Post(path_, payload, "application/json");
      }();
      slots_->release();
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array()) {
        last_error = "malformed response body";
        continue;
      }
      std::vector<std::string> out;
      for (const auto& c : j["choices"]) {
        if (c.is_object() && c.contains("text") && c["text"].is_string()) out.push_back(c["text"].get<std::string>());
      }
      if (static_cast<int>(out.size()) < k) {
        last_error = "endpoint returned " + std::to_string(out.size()) + " choices, expected " + std::to_string(k);
        continue;
      }
      out.resize(static_cast<std::size_t>(k));
      return out;
    }
    throw PolicyError("remote policy failed after " + std::to_string(config_.max_retries + 1) +
                      " attempts: " + last_error);
  }

 private:
  RemoteConfig config_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::string host_;
  std::string path_;
};

}  // namespace tooldrift

namespace tooldrift {

inline std::unique_ptr<Policy> make_policy(const PolicyConfig& config, std::shared_ptr<const PlanBook> plans) {
  validate(config);
  switch (config.kind) {
    case PolicyKind::scripted_adaptive: return std::make_unique<ScriptedPolicy>(ScriptMode::adaptive, plans);
    case PolicyKind::scripted_rigid: return std::make_unique<ScriptedPolicy>(ScriptMode::rigid, plans);
    case PolicyKind::scripted_semi_adaptive:
      return std::make_unique<ScriptedPolicy>(ScriptMode::semi_adaptive, plans);
    case PolicyKind::remote: break;
  }
  RemoteConfig rc;
  rc.endpoint = *config.endpoint;
  rc.temperature = config.temperature;
  rc.request_timeout = config.request_timeout;
  rc.max_retries = config.max_retries;
  rc.max_in_flight = config.max_in_flight;
  return std::make_unique<RemotePolicy>(rc);
}

}  // namespace tooldrift
