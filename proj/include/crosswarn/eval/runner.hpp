#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crosswarn/decision/decision.hpp"
#include "crosswarn/eval/metrics.hpp"
#include "crosswarn/scenario/scenario.hpp"
#include "crosswarn/sensor/sensor.hpp"

namespace crosswarn::eval {

using decision::DecisionState;
using decision::PipelineParams;
using decision::Rule;
using scenario::GroundTruthParams;
using scenario::Scenario;
using scenario::Suite;
using sensor::Observation;
using sensor::SensorConfig;

struct RunOptions {
  Rule rule = Rule::kPairwise;
  PipelineParams params;
  int predictor_order = 1;
  GroundTruthParams gt;
};

/// Trial-independent geometry: agent states and per-camera views per frame.
struct SceneViews {
  double fps = 30.0;
  std::vector<std::vector<scenario::AgentState>> agents;              // [frame][agent]
  std::vector<std::vector<std::vector<sensor::CameraView>>> views;  // [frame][agent][camera]
};

SceneViews compute_views(const Scenario& s, const SensorConfig& cfg);

/// Undelayed observations per frame for the trial set in cfg.
std::vector<std::vector<Observation>> observations_from_views(const SceneViews& views,
                                                              const SensorConfig& cfg);

struct FrameInput {
  std::vector<decision::DecisionTrack> tracks;
  bool bike_detected = false;
};

/// Everything the decision rules see, independent of their parameters.
struct PerceptionTrace {
  double fps = 30.0;
  std::vector<FrameInput> frames;
};

/// Delay, track and latency-compensate an observation stream.
PerceptionTrace perceive(const std::vector<std::vector<Observation>>& observations,
                         int latency_frames, int predictor_order, double fps);

std::vector<DecisionState> decide_trace(const PerceptionTrace& trace, Rule rule,
                                        const PipelineParams& params);

std::vector<decision::State> states_of(const std::vector<DecisionState>& decisions);

struct ScenarioRun {
  std::string scenario_id;
  std::vector<std::vector<Observation>> observations;  // undelayed, per frame
  std::vector<DecisionState> decisions;
  std::vector<FrameLabel> labels;
  MetricCounts counts;
  std::optional<double> budget_s;
};

/// Frame loop: true state, observe, delay, track, compensate, decide.
ScenarioRun run_scenario(const Scenario& s, const RunOptions& opts, const SensorConfig& cfg);

struct ScenarioSummary {
  std::string id;
  MetricCounts counts;
  bool has_actionable = false;
  int trials = 0;
  int alerted_trials = 0;
  double budget_sum = 0.0;  // over alerted trials

  std::optional<double> mean_budget() const;
  std::optional<double> sensitivity() const;
};

struct SuiteResult {
  std::map<std::string, ScenarioSummary> scenarios;  // keyed by id
  MetricCounts counts;  // pooled in id order
  Metrics metrics;
  std::optional<double> mean_budget_s;  // over scenario-trials that alerted
  int trials = 1;
};

SuiteResult summarize(std::map<std::string, ScenarioSummary> scenarios, int trials);

/// Precomputed perception for a suite under one sensor condition, so that
/// decision parameters and ground-truth thresholds can be swept cheaply.
/// Holds every trial in memory; keep trial counts small.
class SuiteCache {
 public:
  SuiteCache(const Suite& suite, const SensorConfig& cfg, int trials, int latency_frames,
             int predictor_order);

  SuiteResult evaluate(Rule rule, const PipelineParams& params, const GroundTruthParams& gt) const;
  SuiteResult evaluate(Rule rule, const PipelineParams& params) const;

  const std::vector<std::string>& ids() const { return ids_; }
  int trials() const { return trials_; }

 private:
  const Suite* suite_;
  std::vector<std::string> ids_;
  int trials_;
  std::vector<std::vector<PerceptionTrace>> traces_;  // [scenario][trial]
  GroundTruthParams default_gt_;
  std::vector<std::vector<FrameLabel>> default_labels_;
};

/// Whole-suite evaluation, streaming one trial at a time. Stochastic sensing
/// pools `trials` seeded trials; deterministic sensing runs once.
SuiteResult evaluate_suite(const Suite& suite, const RunOptions& opts, const SensorConfig& cfg,
                           int trials);

}  // namespace crosswarn::eval
