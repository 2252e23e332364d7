// Acceptance checks for the testbench. Prints one PASS/FAIL line per
// criterion and exits nonzero when any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crosswarn/calibration/calibration.hpp"
#include "crosswarn/decision/decision.hpp"
#include "crosswarn/eval/metrics.hpp"
#include "crosswarn/eval/report.hpp"
#include "crosswarn/eval/runner.hpp"
#include "crosswarn/eval/studies.hpp"
#include "crosswarn/geometry/bbox.hpp"
#include "crosswarn/geometry/camera_model.hpp"
#include "crosswarn/geometry/ground_lut.hpp"
#include "crosswarn/scenario/scenario.hpp"
#include "crosswarn/sensor/sensor.hpp"
#include "crosswarn/service/config.hpp"

using namespace crosswarn;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kData(CROSSWARN_DATA_DIR);

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string pct(const std::optional<double>& v, int digits = 1) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f%%", digits, 100.0 * *v);
  return buf;
}

std::string num(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const service::AppConfig& shipped() {
  static const auto cfg = service::load_config(kData / "config.yaml");
  return cfg;
}

const scenario::Suite& suite() {
  static const auto s = scenario::load_suite(shipped().suite_dir);
  return s;
}

// 1
void geometry_round_trip(Outcome& o) {
  const geometry::CameraModel cam;
  const auto t0 = Clock::now();
  const auto lut = geometry::GroundLut::build(cam);
  const double build_s = seconds_since(t0);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> du(0, cam.width - 1), dv(0, cam.height - 1);
  int n = 0;
  double worst_px = 0.0;
  while (n < 100000) {
    const int u = du(rng), v = dv(rng);
    const auto g = lut.at(u, v);
    if (!g) continue;
    const auto px = geometry::ground_to_pixel(cam, {g->x(), g->y(), 0.0});
    if (!px) continue;
    worst_px = std::max(worst_px, (*px - Eigen::Vector2d(u, v)).norm());
    ++n;
  }

  // ground points within the decision range, back through the table
  std::uniform_real_distribution<double> range(1.0, 25.0), bearing(-std::numbers::pi * 0.49, std::numbers::pi * 0.49);
  int m = 0;
  double worst_m = 0.0;
  while (m < 100000) {
    const double r = range(rng), b = bearing(rng);
    const Eigen::Vector2d p(r * std::cos(b), r * std::sin(b));
    const auto px = geometry::ground_to_pixel(cam, {p.x(), p.y(), 0.0});
    if (!px) continue;
    const auto g = lut.sample(px->x(), px->y());
    if (!g) continue;
    worst_m = std::max(worst_m, (*g - p).norm());
    ++m;
  }
  o.detail << n << " pixels, worst pixel->ground->pixel " << num(worst_px, 4) << " px; " << m
           << " ground points, worst ground->pixel->ground " << num(worst_m, 4) << " m; LUT build "
           << num(build_s, 2) << " s";
  o.require(worst_px < 0.5, "pixel round trip < 0.5 px");
  o.require(worst_m < 0.05, "ground round trip < 0.05 m");
  o.require(build_s < 10.0, "LUT build < 10 s");
}

// 2
void stopping_distance(Outcome& o) {
  const double field = scenario::stopping_distance(8.33, 0.84, 1.96);
  const double aashto = scenario::stopping_distance(8.33, 2.5, 3.4);
  const double swerve = scenario::swerve_time(1.0, 0.4);
  o.detail << "d_stop " << num(field) << " m, AASHTO " << num(aashto) << " m, swerve " << num(swerve) << " s";
  o.require(std::abs(field - 24.7) <= 0.05, "24.7 m");
  o.require(std::abs(aashto - 31.0) <= 0.05, "31.0 m");
  o.require(std::abs(swerve - 1.55) <= 0.01, "1.55 s");
}

// 3
void localization_bands(Outcome& o) {
  const geometry::CameraModel cam;
  const auto err = [&](geometry::BoxDims dims, double x) {
    return geometry::bbox_localization_error(cam, {{x, 0.0}, dims, std::numbers::pi / 2});
  };
  const double distances[] = {3, 5, 10, 15, 25};
  double ped_lo = 1e9, ped_hi = -1e9, prev_cyc = 0.0;
  for (double d : distances) {
    const double p = err(geometry::kPedestrianDims, d);
    const double c = err(geometry::kCyclistDims, d);
    const double v = err(geometry::kCarDims, d);
    o.detail << num(d, 0) << " m: ped " << num(p) << " cyc " << num(c) << " car " << num(v) << "; ";
    if (d >= 5) {
      ped_lo = std::min(ped_lo, p);
      ped_hi = std::max(ped_hi, p);
      o.require(std::abs(p - 0.249) <= 0.15, "pedestrian 0.249 +/- 0.15 m at " + num(d, 0) + " m");
    }
    o.require(c >= prev_cyc - 1e-12, "cyclist non-decreasing at " + num(d, 0) + " m");
    prev_cyc = c;
    o.require(p < c && c < v, "ped < cyclist < car at " + num(d, 0) + " m");
  }
  o.detail << "pedestrian spread " << num(ped_hi - ped_lo, 4) << " m";
  o.require(ped_hi - ped_lo < 0.05, "pedestrian spread < 0.05 m");
}

// 4
void calibration_recovery(Outcome& o) {
  const geometry::CameraModel truth;
  const auto start = calibration::coarse_initialization(truth, 200.0);
  const auto frames = calibration::synthesize_frames(truth, 42, {}, 1.0, 42);
  const auto r = calibration::bundle_adjust(frames, geometry::LensModel::kEquidistant, start);
  const double f_err = std::abs(r.intrinsics.focal_px - truth.focal_px) / truth.focal_px;
  const auto rms = calibration::compare_models(frames, start);

  // gradient check on a small problem away from the optimum
  const auto small = calibration::synthesize_frames(truth, 5, {}, 1.0, 7);
  const calibration::ReprojectionProblem problem(small, geometry::LensModel::kEquidistant);
  const auto fit = calibration::bundle_adjust(small, geometry::LensModel::kEquidistant, start);
  calibration::ReprojectionProblem::State s;
  s.intrinsics = fit.intrinsics;
  for (const auto& p : fit.poses) {
    s.rotations.push_back(p.rotation_matrix());
    s.translations.push_back(p.translation);
  }
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd offset(problem.num_parameters());
  for (int i = 0; i < offset.size(); ++i) offset(i) = gauss(rng) * (i < 3 ? 5.0 : 0.01);
  s = problem.apply(s, offset);
  double worst_rel = 0.0;
  for (double scale : {0.0, 2.0}) {
    const calibration::ReprojectionProblem::Loss loss{scale};
    Eigen::MatrixXd h;
    Eigen::VectorXd g;
    problem.normal_equations(s, loss, h, g);
    for (int i = 0; i < problem.num_parameters(); ++i) {
      const double eps = i < 3 ? 1e-4 : 1e-7;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(problem.num_parameters());
      d(i) = eps;
      const double fd = (problem.cost(problem.apply(s, d), loss) - problem.cost(problem.apply(s, -d), loss)) / (2 * eps);
      worst_rel = std::max(worst_rel, std::abs(fd - g(i)) / std::max(1.0, std::abs(g(i))));
    }
  }
  using geometry::LensModel;
  o.detail << "f " << num(r.intrinsics.focal_px, 2) << " px (" << num(100 * f_err, 3) << "% off), RMS "
           << num(r.rms_px) << " px; model RMS equidistant " << num(rms.at(LensModel::kEquidistant))
           << " orthographic " << num(rms.at(LensModel::kOrthographic)) << " stereographic "
           << num(rms.at(LensModel::kStereographic)) << "; gradient rel err " << worst_rel;
  o.require(f_err < 0.005, "f within 0.5%");
  o.require(r.rms_px >= 0.8 && r.rms_px <= 1.3, "RMS in [0.8, 1.3] px");
  o.require(rms.at(LensModel::kEquidistant) < rms.at(LensModel::kOrthographic), "beats orthographic");
  o.require(rms.at(LensModel::kEquidistant) < rms.at(LensModel::kStereographic), "beats stereographic");
  o.require(worst_rel < 1e-4, "gradient within 1e-4");
}

// 5
void co_directional(Outcome& o) {
  const decision::PipelineParams params = shipped().params;
  const double fps = 30.0;
  int full_frames = 0, naive_misses = 0, pairwise_alerts = 0, cases = 0;
  for (double gap : {params.d_min + 0.1, 5.0, 12.0, params.d_max - 0.1}) {
    for (double speed : {3.0, 5.0, 8.0}) {
      for (double heading : {0.0, 0.7, 2.5, -1.9}) {
        ++cases;
        const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
        const Eigen::Vector2d start(4.0, -3.0);
        decision::Perception perception(0, 1);
        decision::CyclistMemory memory;
        for (int f = 0; f < 90; ++f) {
          std::vector<sensor::Observation> obs(2);
          obs[0].agent_id = "cyc";
          obs[0].cls = scenario::AgentClass::kCyclist;
          obs[1].agent_id = "ped";
          obs[1].cls = scenario::AgentClass::kPedestrian;
          const Eigen::Vector2d c = start + dir * (speed / fps * f);
          const Eigen::Vector2d p = c + dir * gap;
          obs[0].true_xy = c;
          obs[1].true_xy = p;
          for (auto& x : obs) {
            x.frame = f;
            x.detected = true;
            x.observed_xy = x.true_xy;
          }
          perception.step(obs, f);
          memory.record(f, perception.bike_detected());
          const auto& tracks = perception.decision_tracks();
          bool full = tracks.size() == 2;
          for (const auto& t : tracks) full = full && static_cast<int>(t.history.size()) >= params.k_lookback + 1;
          if (!full) continue;
          ++full_frames;
          const auto pw = decision::decide(tracks, memory, f, params);
          const auto nv = decision::baseline_decide(decision::Rule::kNaiveClosing, tracks, memory, f, params, fps);
          pairwise_alerts += pw.state == decision::State::kAlert;
          naive_misses += nv.state != decision::State::kAlert;
        }
      }
    }
  }
  o.detail << cases << " constructions, " << full_frames << " frames with full histories: naive ALERT on "
           << full_frames - naive_misses << ", pairwise ALERT on " << pairwise_alerts;
  o.require(full_frames > 0, "frames evaluated");
  o.require(naive_misses == 0, "naive alerts on every frame");
  o.require(pairwise_alerts == 0, "pairwise never alerts");
}

// 6
void rule_ordering(Outcome& o) {
  std::map<decision::Rule, eval::SuiteResult> r;
  for (auto rule : {decision::Rule::kPairwise, decision::Rule::kNaiveClosing, decision::Rule::kTtc,
                    decision::Rule::kDistanceOnly}) {
    auto opts = service::run_options(shipped());
    opts.rule = rule;
    r[rule] = eval::evaluate_suite(suite(), opts, service::sensor_config(shipped()), 1);
    const auto& m = r[rule].metrics;
    o.detail << decision::to_string(rule) << " sens " << pct(m.sensitivity) << " spec " << pct(m.specificity)
             << " sevfn " << pct(m.sev_fn) << "; ";
  }
  using decision::Rule;
  const auto sp = [&](Rule x) { return *r[x].metrics.specificity; };
  const auto se = [&](Rule x) { return *r[x].metrics.sensitivity; };
  const auto fn = [&](Rule x) { return *r[x].metrics.sev_fn; };
  o.require(sp(Rule::kPairwise) > sp(Rule::kNaiveClosing), "pairwise spec > naive spec");
  o.require(sp(Rule::kTtc) > sp(Rule::kPairwise), "ttc spec > pairwise spec");
  o.require(se(Rule::kPairwise) > se(Rule::kTtc), "pairwise sens > ttc sens");
  for (auto x : {Rule::kPairwise, Rule::kNaiveClosing, Rule::kTtc}) {
    o.require(sp(Rule::kDistanceOnly) < sp(x), "distance-only worst specificity");
    o.require(fn(Rule::kDistanceOnly) > fn(x), "distance-only worst SevFN");
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CROSSWARN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 7
void gates(Outcome& o) {
  const auto selected = eval::evaluate_suite(suite(), service::run_options(shipped()),
                                             service::sensor_config(shipped()), 1);
  const auto g = eval::evaluate_gates(selected.metrics, selected.mean_budget_s);
  auto narrow_opts = service::run_options(shipped());
  narrow_opts.params = *eval::find_preset("narrow_window");
  const auto narrow = eval::evaluate_suite(suite(), narrow_opts, service::sensor_config(shipped()), 1);
  const auto ng = eval::evaluate_gates(narrow.metrics, narrow.mean_budget_s);
  const int exit_selected = run_cli("suite");
  const int exit_narrow = run_cli("suite --preset narrow_window");
  o.detail << "selected sens " << pct(selected.metrics.sensitivity) << " spec " << pct(selected.metrics.specificity)
           << " budget " << num(selected.mean_budget_s.value_or(0), 2) << " s, exit " << exit_selected
           << "; narrow window sens " << pct(narrow.metrics.sensitivity) << ", exit " << exit_narrow;
  o.require(g.all(), "selected passes all gates");
  o.require(exit_selected == 0, "suite exits 0");
  o.require(!ng.sensitivity, "narrow window fails the sensitivity gate");
  o.require(exit_narrow != 0, "suite exits nonzero on a failed gate");
}

// 8
void latency_sweep(Outcome& o) {
  const auto t0 = Clock::now();
  const auto cells = eval::latency_sweep(suite(), service::sensor_config(shipped()), service::run_options(shipped()), 1);
  const double secs = seconds_since(t0);
  std::map<std::pair<int, int>, const eval::SuiteResult*> at;
  for (const auto& c : cells) at[{c.latency_frames, c.order}] = &c.result;
  const auto same = [](const eval::SuiteResult& a, const eval::SuiteResult& b) {
    return eval::to_json(a.metrics).dump() == eval::to_json(b.metrics).dump() && a.mean_budget_s == b.mean_budget_s;
  };
  o.require(cells.size() == 48, "16 x 3 cells");
  o.require(same(*at[{0, 0}], *at[{0, 1}]) && same(*at[{0, 1}], *at[{0, 2}]), "latency 0 identical across orders");
  std::vector<int> order2_better;
  for (int l = 1; l <= 15; ++l) {
    const auto& r0 = *at[{l, 0}];
    const auto& r1 = *at[{l, 1}];
    const auto& r2 = *at[{l, 2}];
    o.require(r1.mean_budget_s.value_or(0) >= r0.mean_budget_s.value_or(0),
              "order-1 budget >= order-0 at " + std::to_string(l));
    const auto& m1 = r1.metrics;
    const auto& m2 = r2.metrics;
    const bool beats = *m2.sensitivity > *m1.sensitivity || *m2.specificity > *m1.specificity ||
                       *m2.sev_fn < *m1.sev_fn || *m2.fatigue < *m1.fatigue ||
                       r2.mean_budget_s.value_or(0) > r1.mean_budget_s.value_or(0);
    if (beats) order2_better.push_back(l);
  }
  const double b500 = at[{15, 1}]->mean_budget_s.value_or(0);
  o.detail << "order-1 at 200 ms sens " << pct(at[{6, 1}]->metrics.sensitivity) << " budget "
           << num(at[{6, 1}]->mean_budget_s.value_or(0), 2) << " s; order-1 budget at 500 ms " << num(b500, 2)
           << " s; order 2 beats order 1 on some metric at " << order2_better.size() << " latencies";
  if (!order2_better.empty()) {
    o.detail << " (frames";
    for (int l : order2_better) {
      const auto& r1 = *at[{l, 1}];
      const auto& r2 = *at[{l, 2}];
      o.detail << " " << l << ": budget " << num(r2.mean_budget_s.value_or(0), 2) << " vs "
               << num(r1.mean_budget_s.value_or(0), 2);
    }
    o.detail << ")";
  }
  o.detail << "; sweep " << num(secs, 1) << " s";
  o.require(order2_better.empty(), "order 2 never beats order 1");
  o.require(b500 > 1.87, "order-1 budget at 500 ms > 1.87 s");
  o.require(secs < 300, "sweep < 5 min");
}

// 9
void stochastic(Outcome& o) {
  // dropout frequency against the curve
  auto cfg = service::sensor_config(shipped());
  cfg.stochastic = true;
  scenario::AgentState a;
  a.id = "ped1";
  a.cls = scenario::AgentClass::kPedestrian;
  a.dims = scenario::default_dims(a.cls);
  double worst_pp = 0.0;
  for (double area : {300.0, 1024.0, 3000.0}) {
    sensor::CameraView v;
    v.in_view = true;
    v.area_px2 = area;
    int hits = 0;
    for (int t = 0; t < 10000; ++t) {
      cfg.trial = t;
      hits += sensor::fuse_views(12, a, {v}, cfg).detected;
    }
    worst_pp = std::max(worst_pp, 100.0 * std::abs(hits / 10000.0 - cfg.curve(area)));
  }
  cfg.trial = 0;
  const double fused = sensor::fused_detection_probability({0.7, 0.7});

  // reproducibility of a seeded stochastic report
  const auto prov = service::provenance(shipped());
  const auto report = [&] {
    return eval::to_json(eval::make_report(eval::evaluate_suite(suite(), service::run_options(shipped()), cfg, 5), prov, "r")).dump();
  };
  const bool reproducible = report() == report();

  // two cameras against one, per scenario
  const int trials = 100;
  const auto two_cfg = service::load_config(kData / "two_camera.yaml");
  auto two = service::sensor_config(two_cfg);
  two.stochastic = true;
  const auto one_r = eval::evaluate_suite(suite(), service::run_options(shipped()), cfg, trials);
  const auto two_r = eval::evaluate_suite(suite(), service::run_options(two_cfg), two, trials);
  std::vector<std::string> worse;
  for (const auto& [id, s1] : one_r.scenarios) {
    const auto s2 = two_r.scenarios.at(id).sensitivity();
    if (s1.sensitivity() && s2 && *s2 < *s1.sensitivity()) {
      worse.push_back(id + " " + pct(s2, 2) + " vs " + pct(s1.sensitivity(), 2));
    }
  }
  o.detail << "dropout worst deviation " << num(worst_pp, 2) << " pp; fused(0.7, 0.7) = " << num(fused, 4)
           << "; reproducible " << (reproducible ? "yes" : "no") << "; suite sensitivity one camera "
           << pct(one_r.metrics.sensitivity) << ", two cameras " << pct(two_r.metrics.sensitivity) << " ("
           << trials << " trials); two-camera lower on " << worse.size() << " scenarios";
  for (const auto& w : worse) o.detail << " [" << w << "]";
  o.require(worst_pp <= 2.0, "dropout within 2 pp");
  o.require(std::abs(fused - 0.91) < 1e-12, "fusion formula");
  o.require(reproducible, "byte-reproducible");
  o.require(worse.empty(), "two cameras >= one camera on every scenario");
}

// 10
void metrics_oracle(Outcome& o) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> len(0, 80), tier(0, 2), st(0, 3);
  std::uniform_real_distribution<double> sev(0.0, 1.0);
  int mismatches = 0, imminent_alerts = 0;
  for (int c = 0; c < 1000; ++c) {
    const int n = len(rng);
    std::vector<scenario::FrameLabel> labels(n);
    std::vector<decision::State> v(n);
    long act = 0, act_hit = 0, safe = 0, safe_hit = 0, alerts = 0;
    double sev_all = 0, sev_miss = 0;
    for (int i = 0; i < n; ++i) {
      labels[i].tier = static_cast<scenario::Tier>(tier(rng));
      labels[i].dangerous = labels[i].tier != scenario::Tier::kNone;
      labels[i].severity = labels[i].dangerous ? sev(rng) : 0.0;
      v[i] = static_cast<decision::State>(st(rng));
      const bool a = v[i] == decision::State::kAlert;
      alerts += a;
      if (labels[i].tier == scenario::Tier::kImminent) imminent_alerts += a;
      if (labels[i].tier == scenario::Tier::kActionable) {
        ++act;
        act_hit += a;
        sev_all += labels[i].severity;
        if (!a) sev_miss += labels[i].severity;
      } else if (labels[i].tier == scenario::Tier::kNone) {
        ++safe;
        safe_hit += a;
      }
    }
    const auto m = eval::compute_metrics(v, labels);
    const auto close = [](const std::optional<double>& got, bool defined, double want) {
      return got.has_value() == defined && (!defined || std::abs(*got - want) < 1e-12);
    };
    const bool ok = close(m.sensitivity, act > 0, act ? double(act_hit) / act : 0) &&
                    close(m.specificity, safe > 0, safe ? 1.0 - double(safe_hit) / safe : 0) &&
                    close(m.sev_fn, sev_all > 0, sev_all > 0 ? sev_miss / sev_all : 0) &&
                    close(m.fatigue, n > 0, n ? double(alerts) / n : 0);
    mismatches += !ok;
  }
  o.detail << "1000 random sequences, " << mismatches << " mismatches, " << imminent_alerts
           << " imminent-tier ALERT frames excluded from false positives";
  o.require(mismatches == 0, "oracle agreement");
  o.require(imminent_alerts > 0, "imminent ALERTs exercised");
}

// 11
void gt_grid(Outcome& o) {
  const eval::SuiteCache cache(suite(), service::sensor_config(shipped()), 1, 0, 1);
  const auto grid = eval::gt_sensitivity_grid(cache, service::run_options(shipped()));
  const auto headline = eval::evaluate_suite(suite(), service::run_options(shipped()), service::sensor_config(shipped()), 1);
  double worst = 0.0;
  int defaults = 0;
  bool default_equal = true;
  for (const auto& c : grid) {
    if (c.is_default) {
      ++defaults;
      default_equal = default_equal && eval::to_json(c.result.metrics).dump() == eval::to_json(headline.metrics).dump();
    }
    worst = std::max(worst, std::abs(c.result.metrics.sensitivity.value_or(0) - *headline.metrics.sensitivity));
  }
  o.detail << grid.size() << " cells, largest sensitivity shift " << num(100 * worst, 1) << " pp";
  o.require(grid.size() == 9, "3 x 3 cells");
  o.require(defaults == 3 && default_equal, "default cells equal the headline run");
  o.require(worst < 0.10, "shift < 10 pp");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"geometry round trip", geometry_round_trip},
      {"stopping distance and swerve time", stopping_distance},
      {"localization-error bands", localization_bands},
      {"calibration recovery", calibration_recovery},
      {"co-directional counterexample", co_directional},
      {"decision-rule ordering", rule_ordering},
      {"deployment gates", gates},
      {"latency sweep", latency_sweep},
      {"stochastic sensing", stochastic},
      {"metrics oracle", metrics_oracle},
      {"ground-truth sensitivity grid", gt_grid},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str(), seconds_since(t0), o.failures.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
