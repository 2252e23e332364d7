// crosswarn: command-line front end for the conformance testbench.
//
// Exit codes: 0 ok, 1 deployment gate failed, 2 usage error or unknown
// scenario, 3 bad config/calibration/suite, 4 runtime failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crosswarn/calibration/calibration.hpp"
#include "crosswarn/eval/report.hpp"
#include "crosswarn/eval/runner.hpp"
#include "crosswarn/eval/studies.hpp"
#include "crosswarn/geometry/camera_io.hpp"
#include "crosswarn/geometry/ground_lut.hpp"
#include "crosswarn/service/config.hpp"
#include "crosswarn/service/server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crosswarn;

namespace {

enum Exit { kOk = 0, kGateFail = 1, kUsage = 2, kBadConfig = 3, kRuntime = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config = std::string(CROSSWARN_DATA_DIR) + "/config.yaml";
  std::string calibration;
  std::string suite_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::string preset;
  std::string rule;
  bool stochastic = false;
  bool no_loc_error = false;
  std::optional<int> latency;
  std::optional<int> order;
};

struct Context {
  service::AppConfig cfg;
  scenario::Suite suite;
  eval::RunOptions opts;
  sensor::SensorConfig sensor;
  eval::Provenance prov;
  int trials = 1;
  std::string label;
};

Context load(const Options& o, bool need_suite = true) {
  Context c;
  std::optional<fs::path> cal;
  if (!o.calibration.empty()) cal = o.calibration;
  c.cfg = service::load_config(o.config, cal);
  if (o.seed) c.cfg.seed = *o.seed;
  if (o.trials) c.cfg.trials = *o.trials;
  if (o.stochastic) c.cfg.stochastic = true;
  if (o.no_loc_error) c.cfg.apply_loc_error = false;
  if (o.latency) c.cfg.latency_frames = *o.latency;
  if (o.order) c.cfg.predictor_order = *o.order;
  if (!o.suite_dir.empty()) c.cfg.suite_dir = o.suite_dir;
  if (c.cfg.trials < 1) throw UsageError("--trials must be at least 1");
  c.opts = service::run_options(c.cfg);
  c.label = "config";
  if (!o.preset.empty()) {
    const auto p = eval::find_preset(o.preset);
    if (!p) throw UsageError("unknown preset '" + o.preset + "'");
    c.opts.params = *p;
    c.label = o.preset;
  }
  if (!o.rule.empty()) {
    try {
      c.opts.rule = decision::rule_from_string(o.rule);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (c.opts.rule != decision::Rule::kPairwise) c.label += "/" + std::string(to_string(c.opts.rule));
  c.sensor = service::sensor_config(c.cfg);
  try {
    c.sensor.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.prov = service::provenance(c.cfg);
  c.trials = c.cfg.stochastic ? c.cfg.trials : 1;
  if (need_suite) {
    try {
      c.suite = scenario::load_suite(c.cfg.suite_dir);
    } catch (const std::exception& e) {
      throw service::ConfigError(e.what());
    }
  }
  return c;
}

fs::path out_dir(const Options& o) {
  fs::path d = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(d);
  return d;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "    -";
  char b[16];
  std::snprintf(b, sizeof b, "%5.1f", 100.0 * *v);
  return b;
}

std::string secs(const std::optional<double>& v) {
  if (!v) return "   -";
  char b[16];
  std::snprintf(b, sizeof b, "%4.2f", *v);
  return b;
}

void print_metrics_row(const std::string& label, const eval::SuiteResult& r) {
  std::printf("%-28s sens %s  spec %s  sevfn %s  fatigue %s  budget %s\n", label.c_str(),
              pct(r.metrics.sensitivity).c_str(), pct(r.metrics.specificity).c_str(),
              pct(r.metrics.sev_fn).c_str(), pct(r.metrics.fatigue).c_str(), secs(r.mean_budget_s).c_str());
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json suite_json(const eval::SuiteResult& r) {
  json per = json::object();
  for (const auto& [id, s] : r.scenarios) {
    per[id] = {{"sensitivity", opt(s.sensitivity())}, {"budget_s", opt(s.mean_budget())},
               {"safe_alerted", s.counts.safe_alerted}, {"actionable_alerted", s.counts.actionable_alerted}};
  }
  return {{"metrics", eval::to_json(r.metrics)}, {"mean_warning_budget_s", opt(r.mean_budget_s)},
          {"per_scenario", per}};
}

int cmd_calibrate(const Options& o, int frames, double noise, bool all_models) {
  auto c = load(o, false);
  const auto& truth = c.cfg.cameras.front().model;
  const auto data = calibration::synthesize_frames(truth, frames, {}, noise, c.cfg.seed);
  const auto init = calibration::coarse_initialization(truth, 200.0);
  const auto r = calibration::bundle_adjust(data, geometry::LensModel::kEquidistant, init);
  std::printf("synthetic calibration: %d frames, %.2f px noise, seed %llu\n", frames, noise,
              static_cast<unsigned long long>(c.cfg.seed));
  std::printf("  focal  %.3f px (truth %.3f, %+.3f%%)\n", r.intrinsics.focal_px, truth.focal_px,
              100.0 * (r.intrinsics.focal_px - truth.focal_px) / truth.focal_px);
  std::printf("  center (%.2f, %.2f) px (truth %.2f, %.2f)\n", r.intrinsics.cx, r.intrinsics.cy,
              truth.optical_center.x(), truth.optical_center.y());
  std::printf("  rms    %.3f px (initial %.1f px), %zu LM steps\n", r.rms_px, r.initial_rms_px, r.trace.size());
  json models = json::object();
  if (all_models) {
    for (const auto& [lens, rms] : calibration::compare_models(data, init)) {
      std::printf("  %-14s rms %.3f px\n", std::string(geometry::to_string(lens)).c_str(), rms);
      models[std::string(geometry::to_string(lens))] = std::isfinite(rms) ? json(rms) : json(nullptr);
    }
  }
  if (!o.out.empty()) {
    const auto d = out_dir(o);
    geometry::CameraModel fitted = truth;
    fitted.focal_px = r.intrinsics.focal_px;
    fitted.optical_center = {r.intrinsics.cx, r.intrinsics.cy};
    geometry::save_calibration(d / "camera_calibration.json", fitted);
    calibration::write_trace_jsonl(d / "calibration_trace.jsonl", r.trace);
    write_json(d / "calibration_report.json",
               {{"frames", frames}, {"noise_px", noise}, {"seed", c.cfg.seed}, {"rms_px", r.rms_px},
                {"focal_px", r.intrinsics.focal_px}, {"optical_center", {r.intrinsics.cx, r.intrinsics.cy}},
                {"models", models}});
  }
  return kOk;
}

int cmd_lut(const Options& o) {
  auto c = load(o, false);
  const auto& cam = c.cfg.cameras.front().model;
  const auto t0 = std::chrono::steady_clock::now();
  const auto lut = geometry::GroundLut::build(cam);
  const double secs_taken = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double valid = static_cast<double>(lut.valid_count()) / (static_cast<double>(lut.width()) * lut.height());
  std::printf("ground LUT %dx%d built in %.2f s, %.1f%% of pixels map to the ground\n", lut.width(),
              lut.height(), secs_taken, 100.0 * valid);
  json samples = json::array();
  const int cx = static_cast<int>(std::lround(cam.optical_center.x()));
  for (int v = lut.height() - 1; v >= 0; v -= lut.height() / 16) {
    if (const auto g = lut.at(cx, v)) {
      std::printf("  pixel (%d, %d) -> (%.2f, %.2f) m, range %.2f m\n", cx, v, g->x(), g->y(), g->norm());
      samples.push_back({{"u", cx}, {"v", v}, {"ground", {g->x(), g->y()}}});
    }
  }
  if (!o.out.empty()) {
    write_json(out_dir(o) / "lut_stats.json", {{"width", lut.width()}, {"height", lut.height()},
                                               {"build_s", secs_taken}, {"valid_fraction", valid},
                                               {"samples", samples}});
  }
  return kOk;
}

int cmd_run(const Options& o, const std::string& id) {
  auto c = load(o);
  const auto* s = c.suite.find(id);
  if (!s) {
    std::fprintf(stderr, "unknown scenario '%s'\n", id.c_str());
    return kUsage;
  }
  const auto run = eval::run_scenario(*s, c.opts, c.sensor);
  const auto m = eval::rates(run.counts);
  std::printf("%s (%s): %d frames, %ld alert frames\n", s->id.c_str(), s->name.c_str(),
              static_cast<int>(run.decisions.size()), run.counts.alerts);
  std::printf("  actionable %ld (alerted %ld), safe %ld (alerted %ld), budget %s s\n", run.counts.actionable,
              run.counts.actionable_alerted, run.counts.safe, run.counts.safe_alerted, secs(run.budget_s).c_str());
  std::printf("  sens %s  spec %s  sevfn %s  fatigue %s\n", pct(m.sensitivity).c_str(), pct(m.specificity).c_str(),
              pct(m.sev_fn).c_str(), pct(m.fatigue).c_str());
  std::optional<decision::State> prev;
  for (int f = 0; f < static_cast<int>(run.decisions.size()); ++f) {
    const auto& d = run.decisions[f];
    const auto& l = run.labels[f];
    const bool changed = !prev || *prev != d.state;
    const bool label_changed = f > 0 && run.labels[f - 1].tier != l.tier;
    if (changed || label_changed) {
      std::printf("  frame %4d  %-7s gt %-10s", f, std::string(to_string(d.state)).c_str(),
                  std::string(to_string(l.tier)).c_str());
      if (d.pair) std::printf("  pair (%d, %d)", d.pair->first, d.pair->second);
      std::printf("\n");
    }
    prev = d.state;
  }
  if (!o.out.empty()) {
    const auto p = out_dir(o) / (s->id + ".jsonl");
    eval::write_audit(p, run, c.prov);
    std::printf("audit trail written to %s\n", p.string().c_str());
  }
  return kOk;
}

int cmd_suite(const Options& o) {
  auto c = load(o);
  const auto result = eval::evaluate_suite(c.suite, c.opts, c.sensor, c.trials);
  auto report = eval::make_report(result, c.prov, c.label);
  std::printf("%-28s %-13s %5s %6s %6s %6s %7s\n", "scenario", "category", "act", "sens", "safe", "fp", "budget");
  for (const auto& sc : c.suite.scenarios) {
    const auto& r = result.scenarios.at(sc.id);
    std::printf("%-28s %-13s %5ld %6s %6ld %6ld %7s\n", sc.id.c_str(), std::string(to_string(sc.category)).c_str(),
                r.counts.actionable, pct(r.sensitivity()).c_str(), r.counts.safe, r.counts.safe_alerted,
                secs(r.mean_budget()).c_str());
  }
  print_metrics_row(c.label, result);
  std::printf("%s", eval::gate_summary(report).c_str());
  try {
    std::printf("%s", eval::render_residual_risk(eval::load_residual_risk(c.cfg.residual_risk_path)).c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "residual-risk register unavailable: %s\n", e.what());
  }
  if (!o.out.empty()) {
    const auto d = out_dir(o);
    fs::create_directories(d / "audit");
    if (!c.cfg.stochastic) {
      for (const auto& sc : c.suite.scenarios) {
        eval::write_audit(d / "audit" / (sc.id + ".jsonl"), eval::run_scenario(sc, c.opts, c.sensor), c.prov);
      }
    }
    json j = eval::to_json(report);
    j["audit_trail"] = c.cfg.stochastic ? json(nullptr) : json("audit/");
    write_json(d / "report.json", j);
    std::ofstream(d / "gates.txt") << eval::gate_summary(report);
  }
  return report.gates.all() ? kOk : kGateFail;
}

int cmd_sweep_latency(const Options& o, int max_latency) {
  auto c = load(o);
  const auto cells = eval::latency_sweep(c.suite, c.sensor, c.opts, c.trials, max_latency);
  json rows = json::array();
  for (const auto& cell : cells) {
    char label[48];
    std::snprintf(label, sizeof label, "%3.0f ms order %d", cell.latency_frames * 1000.0 / 30.0, cell.order);
    print_metrics_row(label, cell.result);
    json row = suite_json(cell.result);
    row["latency_frames"] = cell.latency_frames;
    row["order"] = cell.order;
    rows.push_back(row);
  }
  if (!o.out.empty()) write_json(out_dir(o) / "latency_sweep.json", {{"provenance", c.prov.config_hash}, {"cells", rows}});
  return kOk;
}

int cmd_grid_placement(const Options& o) {
  auto c = load(o);
  c.sensor.stochastic = true;  // detection depends on pixel area only through dropout
  c.trials = c.cfg.trials;
  const auto cells = eval::placement_grid(c.suite, c.sensor, c.opts, c.trials, eval::placement_heights(),
                                          eval::placement_pitches());
  json rows = json::array();
  std::printf("sensitivity by height (rows) and pitch (columns)\n%6s", "");
  for (double p : eval::placement_pitches()) std::printf(" %6.0f", p);
  double last_h = -1;
  for (const auto& cell : cells) {
    if (cell.height_m != last_h) {
      std::printf("\n%5.1fm", cell.height_m);
      last_h = cell.height_m;
    }
    std::printf(" %6s", pct(cell.sensitivity).c_str());
    json row = suite_json(cell.result);
    row["height_m"] = cell.height_m;
    row["pitch_deg"] = cell.pitch_deg;
    rows.push_back(row);
  }
  std::printf("\n");
  if (!o.out.empty()) write_json(out_dir(o) / "placement_grid.json", {{"trials", c.trials}, {"cells", rows}});
  return kOk;
}

int cmd_optimize(const Options& o, int generations, int population) {
  auto c = load(o);
  const eval::SuiteCache cache(c.suite, c.sensor, c.trials, c.cfg.latency_frames, c.opts.predictor_order);
  eval::DeOptions de;
  de.generations = generations;
  de.population = population;
  const auto r = eval::optimize_params(cache, {}, c.cfg.seed, de);
  std::printf("best: N=%d d_min=%.3f d_max=%.3f delta_min=%.4f k=%d objective %.4f (%d evaluations)\n",
              r.params.n_memory, r.params.d_min, r.params.d_max, r.params.delta_min, r.params.k_lookback,
              r.objective, r.evaluations);
  std::printf("  sens %s spec %s sevfn %s fatigue %s budget %s gates %s\n", pct(r.metrics.sensitivity).c_str(),
              pct(r.metrics.specificity).c_str(), pct(r.metrics.sev_fn).c_str(), pct(r.metrics.fatigue).c_str(),
              secs(r.mean_budget_s).c_str(), r.gate_pass ? "pass" : "fail");
  for (const auto& p : eval::presets()) print_metrics_row(p.name, cache.evaluate(c.opts.rule, p.params));
  if (!o.out.empty()) {
    json j = eval::to_json(r);
    j["config_hash"] = c.prov.config_hash;
    j["seed"] = c.cfg.seed;
    write_json(out_dir(o) / "optimize.json", j);
  }
  return kOk;
}

int cmd_ablate(const Options& o) {
  auto c = load(o);
  const auto a = eval::ablation_loc_error(c.suite, c.sensor, c.opts, c.trials);
  print_metrics_row("without localization error", a.without_error);
  print_metrics_row("with localization error", a.with_error);
  if (!o.out.empty()) {
    write_json(out_dir(o) / "ablation.json",
               {{"without_error", suite_json(a.without_error)}, {"with_error", suite_json(a.with_error)}});
  }
  return kOk;
}

int cmd_gt_grid(const Options& o) {
  auto c = load(o);
  const eval::SuiteCache cache(c.suite, c.sensor, c.trials, c.cfg.latency_frames, c.opts.predictor_order);
  const auto cells = eval::gt_sensitivity_grid(cache, c.opts);
  json rows = json::array();
  for (const auto& cell : cells) {
    char label[64];
    std::snprintf(label, sizeof label, "%s = %g%s", cell.parameter.c_str(), cell.value, cell.is_default ? " *" : "");
    print_metrics_row(label, cell.result);
    json row = suite_json(cell.result);
    row["parameter"] = cell.parameter;
    row["value"] = cell.value;
    row["default"] = cell.is_default;
    rows.push_back(row);
  }
  if (!o.out.empty()) write_json(out_dir(o) / "gt_grid.json", {{"cells", rows}});
  return kOk;
}

int cmd_serve(const Options& o, std::optional<int> port) {
  auto c = load(o);
  const int p = port.value_or(c.cfg.port);
  const std::string host = c.cfg.host;
  service::Service svc(std::move(c.cfg), std::move(c.suite));
  std::printf("serving on http://%s:%d\n", host.c_str(), p);
  std::fflush(stdout);
  if (!service::serve(svc, host, p)) {
    std::fprintf(stderr, "cannot listen on %s:%d\n", host.c_str(), p);
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pedestrian-cyclist collision-warning conformance testbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Config file (YAML)");
  app.add_option("--calibration", o.calibration, "Calibration JSON overriding the config's default");
  app.add_option("--suite-dir", o.suite_dir, "Scenario suite directory (manifest.json)");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--trials", o.trials, "Monte Carlo trials in stochastic mode");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--preset", o.preset, "narrow_window, conservative, speed_adaptive or selected");
  app.add_option("--rule", o.rule, "pairwise, distance_only, naive_closing or ttc");
  app.add_flag("--stochastic", o.stochastic, "Size-aware stochastic detection");
  app.add_flag("--no-loc-error", o.no_loc_error, "Use true positions instead of projected ones");
  app.add_option("--latency", o.latency, "Camera latency in frames (0-15)");
  app.add_option("--order", o.order, "Latency predictor order (0-2)");

  int frames = 42;
  double noise = 1.0;
  bool all_models = false;
  auto* calibrate = app.add_subcommand("calibrate", "Synthetic calibration run");
  calibrate->add_option("--frames", frames, "Board views");
  calibrate->add_option("--noise", noise, "Pixel noise standard deviation");
  calibrate->add_flag("--compare-models", all_models, "Fit all four lens models");
  auto* lut = app.add_subcommand("lut", "Build the ground LUT and print statistics");
  std::string scenario_id;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("scenario", scenario_id, "Scenario id")->required();
  auto* suite = app.add_subcommand("suite", "Run the whole suite and check the deployment gates");
  int max_latency = 15;
  auto* sweep = app.add_subcommand("sweep-latency", "Latency 0-500 ms times predictor orders 0-2");
  sweep->add_option("--max-latency", max_latency, "Largest latency in frames");
  auto* grid = app.add_subcommand("grid-placement", "Height and pitch grid search");
  int generations = 150, population = 32;
  auto* optimize = app.add_subcommand("optimize", "Differential-evolution parameter search");
  optimize->add_option("--generations", generations);
  optimize->add_option("--population", population);
  auto* ablate = app.add_subcommand("ablate", "Localization-error ablation");
  auto* gt_grid = app.add_subcommand("gt-grid", "Ground-truth threshold sensitivity grid");
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Local HTTP/JSON endpoint");
  serve->add_option("--port", port, "Port (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(o, frames, noise, all_models);
    if (lut->parsed()) return cmd_lut(o);
    if (run->parsed()) return cmd_run(o, scenario_id);
    if (suite->parsed()) return cmd_suite(o);
    if (sweep->parsed()) return cmd_sweep_latency(o, max_latency);
    if (grid->parsed()) return cmd_grid_placement(o);
    if (optimize->parsed()) return cmd_optimize(o, generations, population);
    if (ablate->parsed()) return cmd_ablate(o);
    if (gt_grid->parsed()) return cmd_gt_grid(o);
    if (serve->parsed()) return cmd_serve(o, port);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const service::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
