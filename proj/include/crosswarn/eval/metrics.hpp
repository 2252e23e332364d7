#pragma once

#include <optional>
#include <vector>

#include "crosswarn/decision/decision.hpp"
#include "crosswarn/scenario/scenario.hpp"

namespace crosswarn::eval {

using decision::State;
using scenario::FrameLabel;

/// Raw frame counts; rates are derived so that pooled suites add exactly.
struct MetricCounts {
  long total = 0;
  long alerts = 0;
  long actionable = 0;
  long actionable_alerted = 0;
  long safe = 0;
  long safe_alerted = 0;
  double severity_total = 0.0;
  double severity_missed = 0.0;

  MetricCounts& operator+=(const MetricCounts& o);
};

/// Undefined rates (zero denominator) are empty, never 0.
struct Metrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> sev_fn;
  std::optional<double> fatigue;
  MetricCounts counts;
};

MetricCounts count_frames(const std::vector<State>& verdicts, const std::vector<FrameLabel>& labels);
Metrics rates(const MetricCounts& c);
Metrics compute_metrics(const std::vector<State>& verdicts, const std::vector<FrameLabel>& labels);

/// Seconds from the first ALERT to the closest approach of the first
/// actionable episode. Empty without actionable frames or without an ALERT
/// at or before that closest approach.
std::optional<double> warning_budget(const std::vector<State>& verdicts,
                                     const std::vector<FrameLabel>& labels, double fps);

}  // namespace crosswarn::eval
