#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "crosswarn/scenario/scenario.hpp"
#include "crosswarn/service/config.hpp"

namespace httplib {
class Server;
}

namespace crosswarn::service {

/// Maps to an HTTP status with body {error, detail}.
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, std::string error, const std::string& detail)
      : std::runtime_error(detail), status_(status), error_(std::move(error)) {}
  int status() const { return status_; }
  const std::string& error() const { return error_; }

 private:
  int status_;
  std::string error_;
};

inline constexpr int kMaxRequestTrials = 200;

/// Body of POST /simulate and POST /metrics. Omitted fields take the loaded
/// config's values.
struct RunRequest {
  std::optional<std::string> scenario;  // required by /simulate; whole suite for /metrics when absent
  decision::PipelineParams params;
  decision::Rule rule = decision::Rule::kPairwise;
  bool apply_loc_error = true;
  bool stochastic = false;
  int latency_frames = 0;
  std::uint64_t seed = 0;
  int trials = 1;
  int predictor_order = 1;
};

/// Throws RequestError (400 malformed, 404 unknown scenario).
RunRequest parse_run_request(const nlohmann::json& body, const AppConfig& cfg, const scenario::Suite& suite);

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

/// Request handling without the socket layer. Every route delegates to the
/// evaluation library; only the last suite gate summary is shared state.
class Service {
 public:
  Service(AppConfig cfg, scenario::Suite suite);

  HttpResponse handle(std::string_view method, std::string_view path, const std::string& body);

  nlohmann::json scenarios() const;
  nlohmann::json config() const;
  nlohmann::json simulate(const RunRequest& req) const;
  nlohmann::json metrics(const RunRequest& req);
  nlohmann::json gates() const;

  const AppConfig& app_config() const { return cfg_; }
  const scenario::Suite& suite() const { return suite_; }

 private:
  sensor::SensorConfig sensor_for(const RunRequest& req) const;

  AppConfig cfg_;
  scenario::Suite suite_;
  mutable std::mutex gates_mutex_;
  std::optional<nlohmann::json> last_gates_;
};

nlohmann::json error_body(const std::string& error, const std::string& detail);

/// Registers the JSON routes on an httplib server.
void install_routes(httplib::Server& server, Service& service);

/// Blocks until the server stops. Returns false when the port cannot be bound.
bool serve(Service& service, const std::string& host, int port);

}  // namespace crosswarn::service
