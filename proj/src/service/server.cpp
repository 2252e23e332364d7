#include "crosswarn/service/server.hpp"

#include <set>

#include <httplib.h>

#include "crosswarn/eval/report.hpp"
#include "crosswarn/eval/runner.hpp"
#include "crosswarn/geometry/camera_io.hpp"

namespace crosswarn::service {

using nlohmann::json;

json error_body(const std::string& error, const std::string& detail) {
  return {{"error", error}, {"detail", detail}};
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw RequestError(400, "bad_request", where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw RequestError(400, "bad_request", "unknown field '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw RequestError(400, "bad_request", std::string(key) + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw RequestError(400, "bad_request", std::string(key) + " must be an integer");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw RequestError(400, "bad_request", std::string(key) + " must be a string");
  }
  return v.get<T>();
}

}  // namespace

RunRequest parse_run_request(const json& body, const AppConfig& cfg, const scenario::Suite& suite) {
  check_keys(body, {"scenario", "params", "rule", "sensor", "predictor_order", "trials"}, "request");
  RunRequest r;
  r.params = cfg.params;
  r.rule = cfg.rule;
  r.apply_loc_error = cfg.apply_loc_error;
  r.stochastic = cfg.stochastic;
  r.latency_frames = cfg.latency_frames;
  r.seed = cfg.seed;
  r.trials = cfg.trials;
  r.predictor_order = cfg.predictor_order;

  if (body.contains("scenario")) {
    r.scenario = field<std::string>(body, "scenario", "");
    if (!suite.find(*r.scenario)) throw RequestError(404, "not_found", "unknown scenario '" + *r.scenario + "'");
  }
  try {
    if (body.contains("params")) r.params = params_from_json(body.at("params"), r.params);
    if (body.contains("rule")) r.rule = decision::rule_from_string(field<std::string>(body, "rule", ""));
  } catch (const std::invalid_argument& e) {
    throw RequestError(400, "bad_request", e.what());
  }
  if (body.contains("sensor")) {
    const auto& s = body.at("sensor");
    check_keys(s, {"loc_error", "stochastic", "latency_frames", "seed"}, "sensor");
    r.apply_loc_error = field(s, "loc_error", r.apply_loc_error);
    r.stochastic = field(s, "stochastic", r.stochastic);
    r.latency_frames = field(s, "latency_frames", r.latency_frames);
    r.seed = field(s, "seed", r.seed);
  }
  r.predictor_order = field(body, "predictor_order", r.predictor_order);
  r.trials = field(body, "trials", r.trials);
  if (r.latency_frames < 0 || r.latency_frames > sensor::kMaxLatencyFrames) {
    throw RequestError(400, "bad_request", "latency_frames must be in [0, 15]");
  }
  if (r.predictor_order < 0 || r.predictor_order > 2) {
    throw RequestError(400, "bad_request", "predictor_order must be 0, 1 or 2");
  }
  if (r.trials < 1 || r.trials > kMaxRequestTrials) {
    throw RequestError(400, "bad_request", "trials must be in [1, 200]");
  }
  return r;
}

Service::Service(AppConfig cfg, scenario::Suite suite) : cfg_(std::move(cfg)), suite_(std::move(suite)) {}

sensor::SensorConfig Service::sensor_for(const RunRequest& req) const {
  auto s = sensor_config(cfg_);
  s.apply_loc_error = req.apply_loc_error;
  s.stochastic = req.stochastic;
  s.latency_frames = req.latency_frames;
  s.seed = req.seed;
  return s;
}

json Service::scenarios() const {
  json list = json::array();
  for (const auto& s : suite_.scenarios) {
    json agents = json::array();
    for (const auto& a : s.agents) agents.push_back({{"id", a.id}, {"class", to_string(a.cls)}});
    list.push_back({{"id", s.id},
                    {"name", s.name},
                    {"category", to_string(s.category)},
                    {"duration_s", s.duration_s},
                    {"fps", s.fps},
                    {"agents", agents}});
  }
  return {{"count", list.size()}, {"scenarios", list}, {"config_hash", cfg_.config_hash}};
}

json Service::config() const {
  json cams = json::array();
  for (const auto& c : cfg_.cameras) {
    cams.push_back({{"x", c.pose.x},
                    {"y", c.pose.y},
                    {"yaw_deg", c.pose.yaw_deg},
                    {"height_m", c.model.height_m},
                    {"pitch_deg", c.model.pitch_deg},
                    {"calibration", geometry::calibration_json(c.model)}});
  }
  const auto& g = cfg_.gt;
  return {{"config_hash", cfg_.config_hash},
          {"calibration_version", cfg_.calibration_version},
          {"fps", cfg_.fps},
          {"yolo_input_px", cfg_.yolo_input_px},
          {"rule", to_string(cfg_.rule)},
          {"params", params_to_json(cfg_.params)},
          {"predictor_order", cfg_.predictor_order},
          {"sensor",
           {{"loc_error", cfg_.apply_loc_error},
            {"stochastic", cfg_.stochastic},
            {"latency_frames", cfg_.latency_frames},
            {"seed", cfg_.seed},
            {"trials", cfg_.trials}}},
          {"ground_truth",
           {{"cpa_radius_m", g.cpa_radius_m},
            {"stop_margin", g.stop_margin},
            {"ttc_threshold_s", g.ttc_threshold_s},
            {"t_react_s", g.t_react_s},
            {"decel_mps2", g.decel_mps2},
            {"ebike_decel_mps2", g.ebike_decel_mps2},
            {"v_max_mps", g.v_max_mps},
            {"prt_distracted_s", g.prt_distracted_s}}},
          {"cameras", cams}};
}

json Service::simulate(const RunRequest& req) const {
  if (!req.scenario) throw RequestError(400, "bad_request", "simulate needs a scenario id");
  const auto* s = suite_.find(*req.scenario);
  if (!s) throw RequestError(404, "not_found", "unknown scenario '" + *req.scenario + "'");
  eval::RunOptions opts = run_options(cfg_);
  opts.rule = req.rule;
  opts.params = req.params;
  opts.predictor_order = req.predictor_order;
  const auto run = eval::run_scenario(*s, opts, sensor_for(req));
  json frames = json::array();
  for (int f = 0; f < static_cast<int>(run.decisions.size()); ++f) frames.push_back(eval::audit_record(run, f));
  return {{"scenario", s->id},
          {"config_hash", cfg_.config_hash},
          {"calibration_version", cfg_.calibration_version},
          {"seed", req.seed},
          {"fps", s->fps},
          {"warning_budget_s", run.budget_s ? json(*run.budget_s) : json(nullptr)},
          {"frames", frames}};
}

json Service::metrics(const RunRequest& req) {
  eval::RunOptions opts = run_options(cfg_);
  opts.rule = req.rule;
  opts.params = req.params;
  opts.predictor_order = req.predictor_order;
  const auto sensor = sensor_for(req);

  scenario::Suite subset;
  const scenario::Suite* target = &suite_;
  if (req.scenario) {
    subset.scenarios.push_back(*suite_.find(*req.scenario));
    target = &subset;
  }
  const auto result = eval::evaluate_suite(*target, opts, sensor, req.trials);
  eval::Provenance prov = provenance(cfg_);
  prov.seed = req.seed;
  const auto report = eval::make_report(result, prov, req.scenario ? *req.scenario : "suite");
  json j = eval::to_json(report);
  if (!req.scenario) {
    json g = {{"label", report.label},
              {"gate_pass", report.gates.all()},
              {"gates", j.at("gates")},
              {"summary", eval::gate_summary(report)},
              {"config_hash", cfg_.config_hash},
              {"seed", req.seed},
              {"trials", report.provenance.trials}};
    std::lock_guard lock(gates_mutex_);
    last_gates_ = std::move(g);
  }
  return j;
}

json Service::gates() const {
  std::lock_guard lock(gates_mutex_);
  if (!last_gates_) throw RequestError(404, "not_found", "no suite evaluation has run yet; POST /metrics first");
  return *last_gates_;
}

HttpResponse Service::handle(std::string_view method, std::string_view path, const std::string& body) {
  try {
    if (method == "GET" && path == "/scenarios") return {200, scenarios()};
    if (method == "GET" && path == "/config") return {200, config()};
    if (method == "GET" && path == "/gates") return {200, gates()};
    if (method == "POST" && (path == "/simulate" || path == "/metrics")) {
      json parsed;
      try {
        parsed = body.empty() ? json::object() : json::parse(body);
      } catch (const json::exception&) {
        throw RequestError(400, "bad_request", "request body is not valid JSON");
      }
      const auto req = parse_run_request(parsed, cfg_, suite_);
      return {200, path == "/simulate" ? simulate(req) : metrics(req)};
    }
    return {404, error_body("not_found", std::string("no route for ") + std::string(method) + " " + std::string(path))};
  } catch (const RequestError& e) {
    return {e.status(), error_body(e.error(), e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what())};
  }
}

void install_routes(httplib::Server& server, Service& service) {
  const auto bind = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  for (const char* p : {"/scenarios", "/config", "/gates"}) server.Get(p, bind);
  for (const char* p : {"/simulate", "/metrics"}) server.Post(p, bind);
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(error_body(res.status == 404 ? "not_found" : "bad_request",
                               "no route for " + req.method + " " + req.path)
                        .dump(),
                    "application/json");
  });
}

bool serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, service);
  return server.listen(host, port);
}

}  // namespace crosswarn::service
