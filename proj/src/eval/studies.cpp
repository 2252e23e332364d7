#include "crosswarn/eval/studies.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crosswarn/eval/report.hpp"

namespace crosswarn::eval {

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"narrow_window", {58, 1.9, 10.0, 0.147, 2}},
      {"conservative", {30, 2.5, 15.0, 0.30, 4}},
      {"speed_adaptive", {45, 1.5, 22.0, 0.20, 3}},
      {"selected", {58, 1.9, 24.8, 0.147, 2}},
  };
  return kPresets;
}

std::optional<PipelineParams> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.params;
  }
  return std::nullopt;
}

void ParamBounds::validate() const {
  if (!(n_lo >= 1 && n_lo <= n_hi && d_min_lo > 0 && d_min_lo <= d_min_hi && d_max_lo <= d_max_hi &&
        d_min_hi <= d_max_lo && delta_lo >= 0 && delta_lo <= delta_hi && k_lo >= 1 && k_lo <= k_hi &&
        k_hi <= decision::kMaxLookback)) {
    throw std::invalid_argument("invalid optimizer bounds");
  }
}

double objective(const SuiteResult& r) {
  const auto& m = r.metrics;
  const auto gates = evaluate_gates(m, r.mean_budget_s);
  const int failed = !gates.sensitivity + !gates.specificity + !gates.budget;
  return m.sensitivity.value_or(0.0) + m.specificity.value_or(0.0) - 0.5 * m.sev_fn.value_or(1.0) -
         0.25 * m.fatigue.value_or(0.0) - 10.0 * failed;
}

PipelineParams params_from_vector(const std::vector<double>& x) {
  PipelineParams p;
  p.n_memory = static_cast<int>(std::lround(x[0]));
  p.d_min = x[1];
  p.d_max = std::max(x[2], x[1] + 1e-6);
  p.delta_min = x[3];
  p.k_lookback = static_cast<int>(std::lround(x[4]));
  return p;
}

OptimizeResult optimize_params(const SuiteCache& cache, const ParamBounds& bounds,
                               std::uint64_t seed, const DeOptions& options) {
  bounds.validate();
  if (options.population < 4 || options.generations < 0) throw std::invalid_argument("invalid DE options");
  const std::vector<double> lo{bounds.n_lo, bounds.d_min_lo, bounds.d_max_lo, bounds.delta_lo, bounds.k_lo};
  const std::vector<double> hi{bounds.n_hi, bounds.d_min_hi, bounds.d_max_hi, bounds.delta_hi, bounds.k_hi};
  const std::size_t dim = lo.size();
  const int np = options.population;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OptimizeResult out;
  const auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return objective(cache.evaluate(Rule::kPairwise, params_from_vector(x)));
  };

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  std::vector<double> fit(np);
  for (int i = 0; i < np; ++i) {
    for (std::size_t d = 0; d < dim; ++d) pop[i][d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
    fit[i] = eval(pop[i]);
  }
  const auto record = [&](int gen) {
    const auto best = std::max_element(fit.begin(), fit.end()) - fit.begin();
    out.trace.push_back({gen, fit[best], params_from_vector(pop[best])});
  };
  record(0);

  std::uniform_int_distribution<int> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);
  for (int gen = 1; gen <= options.generations; ++gen) {
    for (int i = 0; i < np; ++i) {
      int r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = pick_dim(rng);
      std::vector<double> trial = pop[i];
      for (std::size_t d = 0; d < dim; ++d) {
        if (d == forced || unit(rng) < options.cr) {
          double v = pop[r1][d] + options.f * (pop[r2][d] - pop[r3][d]);
          // out-of-bounds coordinates restart uniformly between the parent and the bound
          if (v < lo[d]) v = lo[d] + unit(rng) * (pop[i][d] - lo[d]);
          if (v > hi[d]) v = hi[d] - unit(rng) * (hi[d] - pop[i][d]);
          trial[d] = v;
        }
      }
      const double f = eval(trial);
      if (f >= fit[i]) {
        pop[i] = std::move(trial);
        fit[i] = f;
      }
    }
    record(gen);
  }

  const auto best = std::max_element(fit.begin(), fit.end()) - fit.begin();
  out.params = params_from_vector(pop[best]);
  out.objective = fit[best];
  const auto r = cache.evaluate(Rule::kPairwise, out.params);
  out.metrics = r.metrics;
  out.mean_budget_s = r.mean_budget_s;
  out.gate_pass = evaluate_gates(r.metrics, r.mean_budget_s).all();
  return out;
}

namespace {

nlohmann::json params_json(const PipelineParams& p) {
  return {{"N", p.n_memory}, {"d_min", p.d_min}, {"d_max", p.d_max}, {"delta_min", p.delta_min},
          {"k", p.k_lookback}};
}

}  // namespace

nlohmann::json to_json(const OptimizeResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& g : r.trace) {
    trace.push_back({{"generation", g.generation}, {"best_objective", g.best_objective},
                     {"best", params_json(g.best)}});
  }
  return {{"params", params_json(r.params)},
          {"objective", r.objective},
          {"metrics", to_json(r.metrics)},
          {"mean_warning_budget_s", r.mean_budget_s ? nlohmann::json(*r.mean_budget_s) : nlohmann::json()},
          {"gate_pass", r.gate_pass},
          {"evaluations", r.evaluations},
          {"trace", trace}};
}

std::vector<LatencyCell> latency_sweep(const Suite& suite, const SensorConfig& cfg,
                                       const RunOptions& opts, int trials, int max_latency) {
  cfg.validate();
  if (max_latency < 0 || max_latency > sensor::kMaxLatencyFrames) {
    throw std::invalid_argument("max latency must be in [0, 15] frames");
  }
  const int n_trials = cfg.stochastic ? trials : 1;
  constexpr int kOrders = 3;
  const int n_lat = max_latency + 1;
  std::vector<std::map<std::string, ScenarioSummary>> per(static_cast<std::size_t>(n_lat * kOrders));

  for (const auto& s : suite.scenarios) {
    const auto labels = scenario::label_frames(s, opts.gt);
    bool has_actionable = false;
    for (const auto& l : labels) has_actionable |= l.tier == scenario::Tier::kActionable;
    const auto views = compute_views(s, cfg);
    for (int t = 0; t < n_trials; ++t) {
      SensorConfig trial_cfg = cfg;
      trial_cfg.trial = static_cast<std::uint64_t>(t);
      const auto obs = observations_from_views(views, trial_cfg);
      for (int lat = 0; lat < n_lat; ++lat) {
        for (int order = 0; order < kOrders; ++order) {
          const auto states = states_of(decide_trace(perceive(obs, lat, order, s.fps), opts.rule, opts.params));
          auto& sum = per[static_cast<std::size_t>(lat * kOrders + order)][s.id];
          sum.id = s.id;
          sum.trials = n_trials;
          sum.has_actionable = has_actionable;
          sum.counts += count_frames(states, labels);
          if (const auto b = warning_budget(states, labels, s.fps)) {
            ++sum.alerted_trials;
            sum.budget_sum += *b;
          }
        }
      }
    }
  }

  std::vector<LatencyCell> out;
  for (int lat = 0; lat < n_lat; ++lat) {
    for (int order = 0; order < kOrders; ++order) {
      out.push_back({lat, order, summarize(std::move(per[static_cast<std::size_t>(lat * kOrders + order)]), n_trials)});
    }
  }
  return out;
}

std::vector<double> placement_heights() {
  std::vector<double> h;
  for (int i = 0; i <= 12; ++i) h.push_back(1.5 + 0.5 * i);
  return h;
}

std::vector<double> placement_pitches() {
  std::vector<double> p;
  for (int i = 0; i <= 9; ++i) p.push_back(-10.0 * i);
  return p;
}

std::vector<PlacementCell> placement_grid(const Suite& suite, const SensorConfig& cfg,
                                          const RunOptions& opts, int trials,
                                          const std::vector<double>& heights,
                                          const std::vector<double>& pitches) {
  if (!cfg.stochastic) throw std::invalid_argument("placement grid needs stochastic sensing");
  std::vector<PlacementCell> out;
  for (double h : heights) {
    for (double p : pitches) {
      SensorConfig cell_cfg = cfg;
      cell_cfg.cameras.front().model.height_m = h;
      cell_cfg.cameras.front().model.pitch_deg = p;
      cell_cfg.cameras.front().lut.reset();  // the shared LUT belongs to the deployed pose
      PlacementCell cell;
      cell.height_m = h;
      cell.pitch_deg = p;
      cell.result = evaluate_suite(suite, opts, cell_cfg, trials);
      cell.sensitivity = cell.result.metrics.sensitivity;
      out.push_back(std::move(cell));
    }
  }
  return out;
}

Ablation ablation_loc_error(const Suite& suite, const SensorConfig& cfg, const RunOptions& opts,
                            int trials) {
  SensorConfig off = cfg;
  off.apply_loc_error = false;
  SensorConfig on = cfg;
  on.apply_loc_error = true;
  return {evaluate_suite(suite, opts, off, trials), evaluate_suite(suite, opts, on, trials)};
}

std::vector<GtCell> gt_sensitivity_grid(const SuiteCache& cache, const RunOptions& opts) {
  struct Axis {
    const char* name;
    double scenario::GroundTruthParams::*field;
    std::vector<double> values;
  };
  const std::vector<Axis> axes = {
      {"cpa_radius_m", &scenario::GroundTruthParams::cpa_radius_m, {3.0, 5.0, 7.0}},
      {"stop_margin", &scenario::GroundTruthParams::stop_margin, {0.6, 0.8, 1.0}},
      {"ttc_threshold_s", &scenario::GroundTruthParams::ttc_threshold_s, {2.0, 3.0, 4.0}},
  };
  std::vector<GtCell> out;
  for (const auto& axis : axes) {
    for (double v : axis.values) {
      scenario::GroundTruthParams gt = opts.gt;
      gt.*axis.field = v;
      GtCell cell;
      cell.parameter = axis.name;
      cell.value = v;
      cell.is_default = v == opts.gt.*axis.field;
      cell.result = cache.evaluate(opts.rule, opts.params, gt);
      out.push_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace crosswarn::eval
