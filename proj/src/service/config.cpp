#include "crosswarn/service/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "crosswarn/geometry/camera_io.hpp"

namespace crosswarn::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string env_name(const std::vector<std::string>& key_path) {
  std::string out = "CONFIG";
  for (std::size_t i = 0; i < key_path.size(); ++i) {
    out += i == 0 ? "_" : "__";
    for (char c : key_path[i]) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

json scalar_value(const std::string& s, bool quoted) {
  if (quoted) return s;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  std::int64_t i = 0;
  const char* end = s.data() + s.size();
  if (auto [p, ec] = std::from_chars(s.data(), end, i); ec == std::errc() && p == end) return i;
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

json convert(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_value(n.Scalar(), n.Tag() == "!");
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : n) arr.push_back(convert(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = convert(kv.second);
      return obj;
    }
  }
  return nullptr;
}

void override_leaves(json& node, std::vector<std::string>& path, const EnvLookup& env) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      path.push_back(it.key());
      override_leaves(it.value(), path, env);
      path.pop_back();
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      path.push_back(std::to_string(i));
      override_leaves(node[i], path, env);
      path.pop_back();
    }
  } else if (!path.empty()) {
    if (const auto v = env(env_name(path))) node = scalar_value(*v, false);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a mapping");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

json read_json_file(const fs::path& p, const char* what) {
  std::ifstream in(p);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + p.string());
  }
}

}  // namespace

json yaml_to_json(const std::string& yaml_text) {
  try {
    return convert(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
}

void apply_env_overrides(json& tree, const EnvLookup& env) {
  std::vector<std::string> path;
  override_leaves(tree, path, env);
}

json params_to_json(const decision::PipelineParams& p) {
  return {{"N", p.n_memory}, {"d_min", p.d_min}, {"d_max", p.d_max}, {"delta_min", p.delta_min},
          {"k", p.k_lookback}};
}

decision::PipelineParams params_from_json(const json& j, decision::PipelineParams p) {
  if (!j.is_object()) throw std::invalid_argument("pipeline parameters must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (!it.value().is_number()) throw std::invalid_argument("pipeline parameter '" + k + "' must be a number");
    if (k == "N") {
      p.n_memory = it.value().get<int>();
    } else if (k == "d_min") {
      p.d_min = it.value().get<double>();
    } else if (k == "d_max") {
      p.d_max = it.value().get<double>();
    } else if (k == "delta_min") {
      p.delta_min = it.value().get<double>();
    } else if (k == "k") {
      p.k_lookback = it.value().get<int>();
    } else {
      throw std::invalid_argument("unknown pipeline parameter '" + k + "'");
    }
  }
  p.validate();
  return p;
}

AppConfig load_config(const fs::path& path, const std::optional<fs::path>& calibration_override,
                      const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  json tree = yaml_to_json(text.str());
  if (tree.is_null()) tree = json::object();
  check_keys(tree,
             {"height_m", "pitch_deg", "fps", "yolo_input_px", "calibration", "recall_curve", "suite_dir",
              "residual_risk", "cameras", "sensor", "rule", "pipeline", "ground_truth", "server"},
             "config");
  apply_env_overrides(tree, env);
  if (calibration_override) tree["calibration"] = calibration_override->string();

  AppConfig cfg;
  cfg.source = path;
  const fs::path base = path.parent_path();
  try {
    const double height = get_or(tree, "height_m", 3.66);
    const double pitch = get_or(tree, "pitch_deg", 0.0);
    cfg.fps = get_or(tree, "fps", 30.0);
    cfg.yolo_input_px = get_or(tree, "yolo_input_px", 1280);
    if (!(cfg.fps > 0) || cfg.yolo_input_px <= 0) throw ConfigError("fps and yolo_input_px must be positive");
    const fs::path default_cal = get_or<std::string>(tree, "calibration", "camera_calibration.json");
    cfg.recall_curve_path = resolve(base, get_or<std::string>(tree, "recall_curve", "recall_curve_standin.json"));
    cfg.suite_dir = resolve(base, get_or<std::string>(tree, "suite_dir", "scenarios"));
    cfg.residual_risk_path = resolve(base, get_or<std::string>(tree, "residual_risk", "residual_risk.json"));

    json cams = tree.contains("cameras") ? tree.at("cameras") : json::array({json::object()});
    if (!cams.is_array() || cams.empty()) throw ConfigError("cameras must be a non-empty list");
    cfg.calibrations = json::array();
    for (const auto& c : cams) {
      check_keys(c, {"x", "y", "yaw_deg", "height_m", "pitch_deg", "calibration_ref"}, "cameras entry");
      CameraEntry e;
      e.pose = {get_or(c, "x", 0.0), get_or(c, "y", 0.0), get_or(c, "yaw_deg", 0.0)};
      e.calibration_ref = resolve(base, get_or<std::string>(c, "calibration_ref", default_cal.string()));
      const json cal = read_json_file(e.calibration_ref, "calibration file");
      geometry::apply_calibration_json(cal, e.model);
      e.model.height_m = get_or(c, "height_m", height);
      e.model.pitch_deg = get_or(c, "pitch_deg", pitch);
      e.model.validate();
      cfg.calibrations.push_back(cal);
      cfg.cameras.push_back(std::move(e));
    }

    const json sensor = tree.value("sensor", json::object());
    check_keys(sensor, {"loc_error", "stochastic", "latency_frames", "predictor_order", "seed", "trials"},
               "sensor");
    cfg.apply_loc_error = get_or(sensor, "loc_error", true);
    cfg.stochastic = get_or(sensor, "stochastic", false);
    cfg.latency_frames = get_or(sensor, "latency_frames", 0);
    cfg.predictor_order = get_or(sensor, "predictor_order", 1);
    cfg.seed = get_or<std::uint64_t>(sensor, "seed", 0);
    cfg.trials = get_or(sensor, "trials", 1);
    if (cfg.predictor_order < 0 || cfg.predictor_order > 2) throw ConfigError("predictor_order must be 0, 1 or 2");
    if (cfg.trials < 1) throw ConfigError("trials must be at least 1");

    cfg.rule = decision::rule_from_string(get_or<std::string>(tree, "rule", "pairwise"));
    cfg.params = params_from_json(tree.value("pipeline", json::object()), decision::PipelineParams{});

    const json gt = tree.value("ground_truth", json::object());
    check_keys(gt,
               {"cpa_radius_m", "stop_margin", "ttc_threshold_s", "t_react_s", "decel_mps2", "ebike_decel_mps2",
                "v_max_mps", "prt_distracted_s"},
               "ground_truth");
    auto& g = cfg.gt;
    g.cpa_radius_m = get_or(gt, "cpa_radius_m", g.cpa_radius_m);
    g.stop_margin = get_or(gt, "stop_margin", g.stop_margin);
    g.ttc_threshold_s = get_or(gt, "ttc_threshold_s", g.ttc_threshold_s);
    g.t_react_s = get_or(gt, "t_react_s", g.t_react_s);
    g.decel_mps2 = get_or(gt, "decel_mps2", g.decel_mps2);
    g.ebike_decel_mps2 = get_or(gt, "ebike_decel_mps2", g.ebike_decel_mps2);
    g.v_max_mps = get_or(gt, "v_max_mps", g.v_max_mps);
    g.prt_distracted_s = get_or(gt, "prt_distracted_s", g.prt_distracted_s);
    g.validate();

    const json server = tree.value("server", json::object());
    check_keys(server, {"host", "port"}, "server");
    cfg.host = get_or<std::string>(server, "host", cfg.host);
    cfg.port = get_or(server, "port", cfg.port);

    cfg.curve = sensor::RecallCurve::load(cfg.recall_curve_path);
    sensor_config(cfg).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  cfg.effective = tree;
  cfg.config_hash = eval::content_hash({{"config", tree}, {"calibration", cfg.calibrations}});
  cfg.calibration_version = "cal-" + eval::content_hash(cfg.calibrations.at(0));
  return cfg;
}

sensor::SensorConfig sensor_config(const AppConfig& cfg) {
  sensor::SensorConfig s;
  s.apply_loc_error = cfg.apply_loc_error;
  s.stochastic = cfg.stochastic;
  s.curve = cfg.curve;
  s.latency_frames = cfg.latency_frames;
  s.yolo_input_px = cfg.yolo_input_px;
  s.seed = cfg.seed;
  for (const auto& c : cfg.cameras) s.cameras.push_back({c.pose, c.model, nullptr});
  return s;
}

eval::RunOptions run_options(const AppConfig& cfg) {
  eval::RunOptions o;
  o.rule = cfg.rule;
  o.params = cfg.params;
  o.predictor_order = cfg.predictor_order;
  o.gt = cfg.gt;
  return o;
}

eval::Provenance provenance(const AppConfig& cfg) {
  return {cfg.config_hash, cfg.calibration_version, cfg.seed, cfg.stochastic ? cfg.trials : 1};
}

}  // namespace crosswarn::service
