#include "crosswarn/eval/metrics.hpp"

#include <stdexcept>

namespace crosswarn::eval {

using scenario::Tier;

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
  total += o.total;
  alerts += o.alerts;
  actionable += o.actionable;
  actionable_alerted += o.actionable_alerted;
  safe += o.safe;
  safe_alerted += o.safe_alerted;
  severity_total += o.severity_total;
  severity_missed += o.severity_missed;
  return *this;
}

MetricCounts count_frames(const std::vector<State>& verdicts, const std::vector<FrameLabel>& labels) {
  if (verdicts.size() != labels.size()) throw std::invalid_argument("verdicts and labels are not aligned");
  MetricCounts c;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const bool alert = verdicts[i] == State::kAlert;
    const auto& l = labels[i];
    ++c.total;
    if (alert) ++c.alerts;
    if (l.tier == Tier::kActionable) {
      ++c.actionable;
      c.severity_total += l.severity;
      if (alert) {
        ++c.actionable_alerted;
      } else {
        c.severity_missed += l.severity;
      }
    }
    if (!l.dangerous) {
      ++c.safe;
      if (alert) ++c.safe_alerted;
    }
  }
  return c;
}

Metrics rates(const MetricCounts& c) {
  Metrics m;
  m.counts = c;
  if (c.actionable > 0) m.sensitivity = static_cast<double>(c.actionable_alerted) / c.actionable;
  if (c.safe > 0) m.specificity = 1.0 - static_cast<double>(c.safe_alerted) / c.safe;
  if (c.severity_total > 0.0) m.sev_fn = c.severity_missed / c.severity_total;
  if (c.total > 0) m.fatigue = static_cast<double>(c.alerts) / c.total;
  return m;
}

Metrics compute_metrics(const std::vector<State>& verdicts, const std::vector<FrameLabel>& labels) {
  return rates(count_frames(verdicts, labels));
}

std::optional<double> warning_budget(const std::vector<State>& verdicts,
                                     const std::vector<FrameLabel>& labels, double fps) {
  if (verdicts.size() != labels.size()) throw std::invalid_argument("verdicts and labels are not aligned");
  int cpa_frame = -1;
  for (const auto& l : labels) {
    if (l.tier == Tier::kActionable) {
      cpa_frame = l.cpa_frame;
      break;
    }
  }
  if (cpa_frame < 0) return std::nullopt;
  for (int f = 0; f <= cpa_frame && f < static_cast<int>(verdicts.size()); ++f) {
    if (verdicts[f] == State::kAlert) return (cpa_frame - f) / fps;
  }
  return std::nullopt;
}

}  // namespace crosswarn::eval
