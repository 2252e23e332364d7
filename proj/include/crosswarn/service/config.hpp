#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crosswarn/decision/decision.hpp"
#include "crosswarn/eval/report.hpp"
#include "crosswarn/eval/runner.hpp"
#include "crosswarn/geometry/camera_model.hpp"
#include "crosswarn/scenario/scenario.hpp"
#include "crosswarn/sensor/sensor.hpp"

namespace crosswarn::service {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CameraEntry {
  scenario::CameraPose pose;
  geometry::CameraModel model;
  std::filesystem::path calibration_ref;
};

/// Effective configuration after file loading and environment overrides.
/// Relative paths in the file resolve against the file's directory.
struct AppConfig {
  std::filesystem::path source;
  double fps = 30.0;
  int yolo_input_px = 1280;
  std::vector<CameraEntry> cameras;  // first entry is the primary camera
  std::filesystem::path recall_curve_path;
  sensor::RecallCurve curve;
  std::filesystem::path suite_dir;
  std::filesystem::path residual_risk_path;

  bool apply_loc_error = true;
  bool stochastic = false;
  int latency_frames = 0;
  int predictor_order = 1;
  std::uint64_t seed = 0;
  int trials = 1;

  decision::Rule rule = decision::Rule::kPairwise;
  decision::PipelineParams params;
  scenario::GroundTruthParams gt;

  std::string host = "127.0.0.1";
  int port = 8080;

  nlohmann::json effective;     // config tree after overrides
  nlohmann::json calibrations;  // calibration file contents, one per camera
  std::string config_hash;
  std::string calibration_version;
};

/// Returns the value of an environment variable, if set.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Name of the variable that overrides a config leaf: CONFIG_ followed by the
/// upper-cased key path joined with "__", e.g. CONFIG_PIPELINE__D_MAX.
std::string env_name(const std::vector<std::string>& key_path);

/// Converts a YAML document to JSON. Scalars become integers, floats or
/// booleans when they parse as such, strings otherwise.
nlohmann::json yaml_to_json(const std::string& yaml_text);

/// Replaces every scalar leaf that has a matching CONFIG_ variable.
void apply_env_overrides(nlohmann::json& tree, const EnvLookup& env);

/// Loads and validates a config file. `calibration_override` replaces the
/// default calibration file for cameras without their own calibration_ref.
/// Throws ConfigError.
AppConfig load_config(const std::filesystem::path& path,
                      const std::optional<std::filesystem::path>& calibration_override = std::nullopt,
                      const EnvLookup& env = process_env);

sensor::SensorConfig sensor_config(const AppConfig& cfg);
eval::RunOptions run_options(const AppConfig& cfg);
eval::Provenance provenance(const AppConfig& cfg);

nlohmann::json params_to_json(const decision::PipelineParams& p);
decision::PipelineParams params_from_json(const nlohmann::json& j, decision::PipelineParams base);

}  // namespace crosswarn::service
