#include "crosswarn/eval/runner.hpp"

#include <stdexcept>

namespace crosswarn::eval {

SceneViews compute_views(const Scenario& s, const SensorConfig& cfg) {
  SceneViews out;
  out.fps = s.fps;
  const int frames = s.frame_count();
  out.agents.reserve(frames);
  out.views.reserve(frames);
  for (int f = 0; f < frames; ++f) {
    auto agents = scenario::positions_at(s, f);
    std::vector<std::vector<sensor::CameraView>> views;
    views.reserve(agents.size());
    for (const auto& a : agents) {
      std::vector<sensor::CameraView> per_camera;
      per_camera.reserve(cfg.cameras.size());
      for (const auto& cam : cfg.cameras) {
        per_camera.push_back(sensor::view_agent(cam, a, cfg.apply_loc_error, cfg.yolo_input_px));
      }
      views.push_back(std::move(per_camera));
    }
    out.agents.push_back(std::move(agents));
    out.views.push_back(std::move(views));
  }
  return out;
}

std::vector<std::vector<Observation>> observations_from_views(const SceneViews& views,
                                                              const SensorConfig& cfg) {
  std::vector<std::vector<Observation>> out(views.agents.size());
  sensor::CameraFusion fusion;
  for (std::size_t f = 0; f < views.agents.size(); ++f) {
    out[f].reserve(views.agents[f].size());
    for (std::size_t a = 0; a < views.agents[f].size(); ++a) {
      out[f].push_back(fusion.fuse(static_cast<int>(f), views.agents[f][a], views.views[f][a], cfg));
    }
  }
  return out;
}

PerceptionTrace perceive(const std::vector<std::vector<Observation>>& observations,
                         int latency_frames, int predictor_order, double fps) {
  PerceptionTrace trace;
  trace.fps = fps;
  trace.frames.reserve(observations.size());
  sensor::DelayBuffer delay(latency_frames);
  decision::Perception perception(latency_frames, predictor_order);
  for (std::size_t f = 0; f < observations.size(); ++f) {
    perception.step(delay.push(observations[f]), static_cast<int>(f));
    trace.frames.push_back({perception.decision_tracks(), perception.bike_detected()});
  }
  return trace;
}

std::vector<DecisionState> decide_trace(const PerceptionTrace& trace, Rule rule,
                                        const PipelineParams& params) {
  params.validate();
  std::vector<DecisionState> out;
  out.reserve(trace.frames.size());
  decision::CyclistMemory memory;
  for (std::size_t f = 0; f < trace.frames.size(); ++f) {
    const int frame = static_cast<int>(f);
    memory.record(frame, trace.frames[f].bike_detected);
    out.push_back(decision::decide_with(rule, trace.frames[f].tracks, memory, frame, params, trace.fps));
  }
  return out;
}

std::vector<decision::State> states_of(const std::vector<DecisionState>& decisions) {
  std::vector<decision::State> out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) out.push_back(d.state);
  return out;
}

ScenarioRun run_scenario(const Scenario& s, const RunOptions& opts, const SensorConfig& cfg) {
  cfg.validate();
  ScenarioRun run;
  run.scenario_id = s.id;
  run.labels = scenario::label_frames(s, opts.gt);
  run.observations = observations_from_views(compute_views(s, cfg), cfg);
  const auto trace = perceive(run.observations, cfg.latency_frames, opts.predictor_order, s.fps);
  run.decisions = decide_trace(trace, opts.rule, opts.params);
  const auto states = states_of(run.decisions);
  run.counts = count_frames(states, run.labels);
  run.budget_s = warning_budget(states, run.labels, s.fps);
  return run;
}

std::optional<double> ScenarioSummary::mean_budget() const {
  if (alerted_trials == 0) return std::nullopt;
  return budget_sum / alerted_trials;
}

std::optional<double> ScenarioSummary::sensitivity() const { return rates(counts).sensitivity; }

SuiteResult summarize(std::map<std::string, ScenarioSummary> scenarios, int trials) {
  SuiteResult r;
  r.trials = trials;
  int alerted = 0;
  double budget_sum = 0.0;
  for (const auto& [id, s] : scenarios) {
    r.counts += s.counts;
    alerted += s.alerted_trials;
    budget_sum += s.budget_sum;
  }
  r.metrics = rates(r.counts);
  if (alerted > 0) r.mean_budget_s = budget_sum / alerted;
  r.scenarios = std::move(scenarios);
  return r;
}

namespace {

bool same_gt(const GroundTruthParams& a, const GroundTruthParams& b) {
  return a.cpa_radius_m == b.cpa_radius_m && a.stop_margin == b.stop_margin &&
         a.ttc_threshold_s == b.ttc_threshold_s && a.t_react_s == b.t_react_s &&
         a.decel_mps2 == b.decel_mps2 && a.ebike_decel_mps2 == b.ebike_decel_mps2 &&
         a.v_max_mps == b.v_max_mps && a.prt_distracted_s == b.prt_distracted_s;
}

ScenarioSummary summary_start(const std::string& id, const std::vector<FrameLabel>& labels,
                              int trials) {
  ScenarioSummary sum;
  sum.id = id;
  sum.trials = trials;
  for (const auto& l : labels) sum.has_actionable |= l.tier == scenario::Tier::kActionable;
  return sum;
}

void add_trial(ScenarioSummary& sum, const std::vector<decision::State>& states,
               const std::vector<FrameLabel>& labels, double fps) {
  sum.counts += count_frames(states, labels);
  if (const auto b = warning_budget(states, labels, fps)) {
    ++sum.alerted_trials;
    sum.budget_sum += *b;
  }
}

}  // namespace

SuiteCache::SuiteCache(const Suite& suite, const SensorConfig& cfg, int trials, int latency_frames,
                       int predictor_order)
    : suite_(&suite), trials_(cfg.stochastic ? trials : 1) {
  cfg.validate();
  if (trials_ < 1) throw std::invalid_argument("trials must be >= 1");
  for (const auto& s : suite.scenarios) {
    ids_.push_back(s.id);
    default_labels_.push_back(scenario::label_frames(s, default_gt_));
    const auto views = compute_views(s, cfg);
    std::vector<PerceptionTrace> per_trial;
    for (int t = 0; t < trials_; ++t) {
      SensorConfig trial_cfg = cfg;
      trial_cfg.trial = static_cast<std::uint64_t>(t);
      per_trial.push_back(
          perceive(observations_from_views(views, trial_cfg), latency_frames, predictor_order, s.fps));
    }
    traces_.push_back(std::move(per_trial));
  }
}

SuiteResult SuiteCache::evaluate(Rule rule, const PipelineParams& params,
                                 const GroundTruthParams& gt) const {
  const bool relabel = !same_gt(gt, default_gt_);
  std::map<std::string, ScenarioSummary> per;
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    const auto& s = suite_->scenarios[i];
    const auto labels = relabel ? scenario::label_frames(s, gt) : default_labels_[i];
    ScenarioSummary sum = summary_start(s.id, labels, trials_);
    for (const auto& trace : traces_[i]) {
      add_trial(sum, states_of(decide_trace(trace, rule, params)), labels, s.fps);
    }
    per.emplace(sum.id, std::move(sum));
  }
  return summarize(std::move(per), trials_);
}

SuiteResult SuiteCache::evaluate(Rule rule, const PipelineParams& params) const {
  return evaluate(rule, params, default_gt_);
}

SuiteResult evaluate_suite(const Suite& suite, const RunOptions& opts, const SensorConfig& cfg,
                           int trials) {
  cfg.validate();
  const int n_trials = cfg.stochastic ? trials : 1;
  if (n_trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::map<std::string, ScenarioSummary> per;
  for (const auto& s : suite.scenarios) {
    const auto labels = scenario::label_frames(s, opts.gt);
    const auto views = compute_views(s, cfg);
    ScenarioSummary sum = summary_start(s.id, labels, n_trials);
    for (int t = 0; t < n_trials; ++t) {
      SensorConfig trial_cfg = cfg;
      trial_cfg.trial = static_cast<std::uint64_t>(t);
      const auto trace = perceive(observations_from_views(views, trial_cfg), cfg.latency_frames,
                                  opts.predictor_order, s.fps);
      add_trial(sum, states_of(decide_trace(trace, opts.rule, opts.params)), labels, s.fps);
    }
    per.emplace(sum.id, std::move(sum));
  }
  return summarize(std::move(per), n_trials);
}

}  // namespace crosswarn::eval
