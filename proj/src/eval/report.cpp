#include "crosswarn/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace crosswarn::eval {

using nlohmann::json;

GateResult evaluate_gates(const Metrics& m, const std::optional<double>& mean_budget_s) {
  GateResult g;
  g.sensitivity = m.sensitivity && *m.sensitivity >= kGateSensitivity;
  g.specificity = m.specificity && *m.specificity >= kGateSpecificity;
  g.budget = mean_budget_s && *mean_budget_s > kGateBudgetS;
  return g;
}

EvalReport make_report(const SuiteResult& result, const Provenance& provenance, std::string label) {
  EvalReport r;
  r.metrics = result.metrics;
  r.mean_warning_budget_s = result.mean_budget_s;
  for (const auto& [id, s] : result.scenarios) {
    if (s.has_actionable) r.per_scenario_budget.emplace_back(id, s.mean_budget());
  }
  r.gates = evaluate_gates(r.metrics, r.mean_warning_budget_s);
  r.provenance = provenance;
  r.provenance.trials = result.trials;
  r.label = std::move(label);
  return r;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string percent(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *v);
  return buf;
}

}  // namespace

json to_json(const Metrics& m) {
  const auto& c = m.counts;
  return {{"sensitivity", optional_number(m.sensitivity)},
          {"specificity", optional_number(m.specificity)},
          {"sev_fn", optional_number(m.sev_fn)},
          {"fatigue", optional_number(m.fatigue)},
          {"counts",
           {{"total", c.total},
            {"alerts", c.alerts},
            {"actionable", c.actionable},
            {"actionable_alerted", c.actionable_alerted},
            {"safe", c.safe},
            {"safe_alerted", c.safe_alerted}}}};
}

json to_json(const EvalReport& r) {
  json budgets = json::array();
  for (const auto& [id, b] : r.per_scenario_budget) {
    budgets.push_back({{"scenario", id}, {"budget_s", optional_number(b)}});
  }
  json j = to_json(r.metrics);
  j["label"] = r.label;
  j["mean_warning_budget_s"] = optional_number(r.mean_warning_budget_s);
  j["per_scenario_budget"] = budgets;
  j["gate_pass"] = r.gates.all();
  j["gates"] = {{"sensitivity", {{"pass", r.gates.sensitivity}, {"threshold", kGateSensitivity}}},
                {"specificity", {{"pass", r.gates.specificity}, {"threshold", kGateSpecificity}}},
                {"warning_budget", {{"pass", r.gates.budget}, {"threshold_s", kGateBudgetS}}}};
  j["config_hash"] = r.provenance.config_hash;
  j["calibration_version"] = r.provenance.calibration_version;
  j["seed"] = r.provenance.seed;
  j["trials"] = r.provenance.trials;
  j["notes"] = json::array(
      {"scenario trajectories are authored for this suite; absolute numbers are not field results",
       "pedestrian clearance time in the TTC threshold is not modelled"});
  return j;
}

std::string gate_summary(const EvalReport& r) {
  std::ostringstream out;
  const auto line = [&](const char* name, bool pass, const std::string& value, const char* need) {
    out << (pass ? "PASS " : "FAIL ") << name << ": " << value << " (need " << need << ")\n";
  };
  out << "gates for " << r.label << " [config " << r.provenance.config_hash << ", seed "
      << r.provenance.seed << ", trials " << r.provenance.trials << "]\n";
  line("sensitivity", r.gates.sensitivity, percent(r.metrics.sensitivity), ">= 90%");
  line("specificity", r.gates.specificity, percent(r.metrics.specificity), ">= 90%");
  std::string budget = "none";
  if (r.mean_warning_budget_s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f s", *r.mean_warning_budget_s);
    budget = buf;
  }
  line("warning budget", r.gates.budget, budget, "> 1.87 s");
  out << (r.gates.all() ? "all gates pass\n" : "deployment gates FAILED\n");
  return out.str();
}

std::string content_hash(const json& j) {
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json audit_header(const ScenarioRun& run, const Provenance& provenance) {
  return {{"scenario", run.scenario_id},
          {"config_hash", provenance.config_hash},
          {"calibration_version", provenance.calibration_version},
          {"seed", provenance.seed}};
}

json audit_record(const ScenarioRun& run, int frame) {
  json agents = json::array();
  for (const auto& o : run.observations[frame]) {
    agents.push_back({{"id", o.agent_id},
                      {"class", to_string(o.cls)},
                      {"true_xy", {o.true_xy.x(), o.true_xy.y()}},
                      {"observed_xy", o.observed_xy ? json{o.observed_xy->x(), o.observed_xy->y()}
                                                    : json(nullptr)},
                      {"localization_error_m", o.localization_error_m}});
  }
  const auto& d = run.decisions[frame];
  const auto& l = run.labels[frame];
  return {{"scenario", run.scenario_id},
          {"frame", frame},
          {"agents", agents},
          {"state", to_string(d.state)},
          {"active_pair", d.pair ? json{d.pair->first, d.pair->second} : json(nullptr)},
          {"gt", {{"dangerous", l.dangerous}, {"tier", to_string(l.tier)}}}};
}

void write_audit(std::ostream& out, const ScenarioRun& run,
                 const Provenance& provenance) {
  out << audit_header(run, provenance).dump() << '\n';
  for (int f = 0; f < static_cast<int>(run.decisions.size()); ++f) {
    out << audit_record(run, f).dump() << '\n';
  }
}

void write_audit(const std::filesystem::path& path, const ScenarioRun& run,
                 const Provenance& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write audit file " + path.string());
  write_audit(out, run, provenance);
}

json load_residual_risk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open residual-risk register " + path.string());
  return json::parse(in);
}

std::string render_residual_risk(const json& register_json) {
  std::ostringstream out;
  out << "residual risk register\n";
  for (const auto& row : register_json.at("rows")) {
    out << "  - " << row.at("failure_mode").get<std::string>()
        << " | coverage: " << row.at("scenario_coverage").get<std::string>()
        << " | sensor model: " << row.at("sensor_model").get<std::string>()
        << " | field-blocking: " << row.at("field_blocking").get<std::string>() << '\n';
  }
  return out.str();
}

}  // namespace crosswarn::eval
