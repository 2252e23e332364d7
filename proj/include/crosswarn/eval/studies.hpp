#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crosswarn/eval/runner.hpp"

namespace crosswarn::eval {

struct Preset {
  std::string name;
  PipelineParams params;
};

/// Named configurations: Narrow window, Conservative, Speed adaptive, Selected.
const std::vector<Preset>& presets();
std::optional<PipelineParams> find_preset(std::string_view name);

struct ParamBounds {
  double n_lo = 1, n_hi = 150;
  double d_min_lo = 0.5, d_min_hi = 5.0;
  double d_max_lo = 5.0, d_max_hi = 30.0;
  double delta_lo = 0.0, delta_hi = 1.0;
  double k_lo = 1, k_hi = 10;

  void validate() const;
};

struct DeOptions {
  int population = 32;
  int generations = 150;
  double f = 0.7;
  double cr = 0.9;
};

struct DeGeneration {
  int generation = 0;
  double best_objective = 0.0;
  PipelineParams best;
};

struct OptimizeResult {
  PipelineParams params;
  double objective = 0.0;
  Metrics metrics;
  std::optional<double> mean_budget_s;
  bool gate_pass = false;
  std::vector<DeGeneration> trace;
  int evaluations = 0;
};

/// Gates first, then the four reported metrics.
double objective(const SuiteResult& r);

/// Rounds the integer coordinates and clamps d_max above d_min.
PipelineParams params_from_vector(const std::vector<double>& x);

/// Differential evolution, rand/1/bin, over (N, d_min, d_max, delta_min, k).
OptimizeResult optimize_params(const SuiteCache& cache, const ParamBounds& bounds,
                               std::uint64_t seed, const DeOptions& options = {});

nlohmann::json to_json(const OptimizeResult& r);

struct LatencyCell {
  int latency_frames = 0;
  int order = 0;
  SuiteResult result;
};

/// Latency 0..15 frames (0 to 500 ms at 30 fps) times predictor orders 0, 1, 2.
std::vector<LatencyCell> latency_sweep(const Suite& suite, const SensorConfig& cfg,
                                       const RunOptions& opts, int trials, int max_latency = 15);

struct PlacementCell {
  double height_m = 0.0;
  double pitch_deg = 0.0;
  std::optional<double> sensitivity;  // empty when no actionable frame was scored
  SuiteResult result;
};

std::vector<double> placement_heights();  // 1.5 to 7.5 m, step 0.5
std::vector<double> placement_pitches();  // 0 to -90 deg, step 10

/// Changes height and pitch of the primary camera only. Needs stochastic sensing.
std::vector<PlacementCell> placement_grid(const Suite& suite, const SensorConfig& cfg,
                                          const RunOptions& opts, int trials,
                                          const std::vector<double>& heights,
                                          const std::vector<double>& pitches);

struct Ablation {
  SuiteResult without_error;
  SuiteResult with_error;
};

Ablation ablation_loc_error(const Suite& suite, const SensorConfig& cfg, const RunOptions& opts,
                            int trials);

struct GtCell {
  std::string parameter;
  double value = 0.0;
  bool is_default = false;
  SuiteResult result;
};

/// One-at-a-time perturbation of CPA radius, stop margin and TTC threshold.
std::vector<GtCell> gt_sensitivity_grid(const SuiteCache& cache, const RunOptions& opts);

}  // namespace crosswarn::eval
