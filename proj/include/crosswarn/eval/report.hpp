#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crosswarn/eval/runner.hpp"

namespace crosswarn::eval {

inline constexpr double kGateSensitivity = 0.90;
inline constexpr double kGateSpecificity = 0.90;
inline constexpr double kGateBudgetS = 1.87;

struct GateResult {
  bool sensitivity = false;
  bool specificity = false;
  bool budget = false;

  bool all() const { return sensitivity && specificity && budget; }
};

GateResult evaluate_gates(const Metrics& m, const std::optional<double>& mean_budget_s);

struct Provenance {
  std::string config_hash;
  std::string calibration_version;
  std::uint64_t seed = 0;
  int trials = 1;
};

struct EvalReport {
  Metrics metrics;
  std::optional<double> mean_warning_budget_s;
  std::vector<std::pair<std::string, std::optional<double>>> per_scenario_budget;
  GateResult gates;
  Provenance provenance;
  std::string label;  // preset or rule description
};

EvalReport make_report(const SuiteResult& result, const Provenance& provenance, std::string label);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const EvalReport& r);

/// Plain-text gate summary.
std::string gate_summary(const EvalReport& r);

/// 64-bit FNV-1a over the canonical (sorted-key, compact) JSON dump, as hex.
std::string content_hash(const nlohmann::json& j);

/// Audit trail: header line then one record per frame.
void write_audit(std::ostream& out, const ScenarioRun& run,
                 const Provenance& provenance);
void write_audit(const std::filesystem::path& path, const ScenarioRun& run,
                 const Provenance& provenance);

nlohmann::json audit_header(const ScenarioRun& run, const Provenance& provenance);
nlohmann::json audit_record(const ScenarioRun& run, int frame);

/// Residual-risk register shipped as a data file, rendered as text rows.
nlohmann::json load_residual_risk(const std::filesystem::path& path);
std::string render_residual_risk(const nlohmann::json& register_json);

}  // namespace crosswarn::eval
