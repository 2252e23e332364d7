#include <algorithm>
#include <stdexcept>
#include <string>

#include "crosswarn/decision/decision.hpp"

namespace crosswarn::decision {

void PipelineParams::validate() const {
  if (!(d_min > 0.0 && d_min < d_max)) throw std::invalid_argument("need 0 < d_min < d_max");
  if (n_memory < 1) throw std::invalid_argument("N must be >= 1");
  if (k_lookback < 1 || k_lookback > kMaxLookback) throw std::invalid_argument("k must be in [1, 30]");
  if (!(delta_min >= 0.0)) throw std::invalid_argument("delta_min must be >= 0");
}

std::string_view to_string(State s) {
  switch (s) {
    case State::kIdle: return "IDLE";
    case State::kSafe: return "SAFE";
    case State::kWarning: return "WARNING";
    case State::kAlert: return "ALERT";
  }
  return "IDLE";
}

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::kPairwise: return "pairwise";
    case Rule::kDistanceOnly: return "distance_only";
    case Rule::kNaiveClosing: return "naive_closing";
    case Rule::kTtc: return "ttc";
  }
  return "pairwise";
}

Rule rule_from_string(std::string_view s) {
  for (Rule r : {Rule::kPairwise, Rule::kDistanceOnly, Rule::kNaiveClosing, Rule::kTtc}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown decision rule '" + std::string(s) + "'");
}

void CyclistMemory::record(int frame, bool bike_detected) {
  if (bike_detected) last_ = frame;
}

bool CyclistMemory::recent(int frame, int n_frames) const {
  return last_ && frame - *last_ < n_frames;
}

namespace {

// rounding slack for the strict gap comparison; far below any LUT cell
constexpr double kGapSlackM = 1e-9;

struct Split {
  std::vector<const DecisionTrack*> cyclists;
  std::vector<const DecisionTrack*> pedestrians;
};

// Stages 1 and 2, shared by every rule. Returns a final state or nothing.
std::optional<DecisionState> gate_stages(const std::vector<DecisionTrack>& tracks,
                                         const CyclistMemory& memory, int frame,
                                         const PipelineParams& params, Split& split) {
  for (const auto& t : tracks) {
    if (t.cls == DetectorClass::kPerson) split.pedestrians.push_back(&t);
    if (t.cls == DetectorClass::kBike) split.cyclists.push_back(&t);
  }
  const auto by_id = [](const DecisionTrack* a, const DecisionTrack* b) { return a->id < b->id; };
  std::sort(split.cyclists.begin(), split.cyclists.end(), by_id);
  std::sort(split.pedestrians.begin(), split.pedestrians.end(), by_id);
  if (split.pedestrians.empty()) return DecisionState{State::kIdle, std::nullopt};
  if (!memory.recent(frame, params.n_memory)) return DecisionState{State::kSafe, std::nullopt};
  return std::nullopt;
}

const Eigen::Vector2d& back(const DecisionTrack& t, int k) {
  return t.history[t.history.size() - 1 - static_cast<std::size_t>(k)];
}

bool full(const DecisionTrack& t, int k) { return t.history.size() >= static_cast<std::size_t>(k) + 1; }

template <typename Pred>
DecisionState first_pair(const Split& split, Pred&& alert) {
  for (const auto* c : split.cyclists) {
    for (const auto* p : split.pedestrians) {
      if (alert(*c, *p)) return {State::kAlert, std::make_pair(c->id, p->id)};
    }
  }
  return {State::kWarning, std::nullopt};
}

}  // namespace

DecisionState decide(const std::vector<DecisionTrack>& tracks, const CyclistMemory& memory,
                     int frame, const PipelineParams& params) {
  Split split;
  if (auto early = gate_stages(tracks, memory, frame, params, split)) return *early;
  const int k = params.k_lookback;
  return first_pair(split, [&](const DecisionTrack& c, const DecisionTrack& p) {
    if (!full(c, k) || !full(p, k)) return false;
    const double d_t = (back(c, 0) - back(p, 0)).norm();
    if (d_t < params.d_min || d_t > params.d_max) return false;
    const double d_tk = (back(c, k) - back(p, k)).norm();
    const double moved = (back(c, 0) - back(c, k)).norm();
    return d_t < d_tk - kGapSlackM && moved > params.delta_min;
  });
}

DecisionState baseline_decide(Rule rule, const std::vector<DecisionTrack>& tracks,
                              const CyclistMemory& memory, int frame, const PipelineParams& params,
                              double fps) {
  Split split;
  if (auto early = gate_stages(tracks, memory, frame, params, split)) return *early;
  const int k = params.k_lookback;
  switch (rule) {
    case Rule::kPairwise:
      return decide(tracks, memory, frame, params);
    case Rule::kDistanceOnly:
      return first_pair(split, [&](const DecisionTrack& c, const DecisionTrack& p) {
        return (back(c, 0) - back(p, 0)).norm() < kDistanceOnlyThreshold;
      });
    case Rule::kNaiveClosing:
      return first_pair(split, [&](const DecisionTrack& c, const DecisionTrack& p) {
        if (!full(c, k) || !full(p, k)) return false;
        const double d_t = (back(c, 0) - back(p, 0)).norm();
        if (d_t < params.d_min || d_t > params.d_max) return false;
        const double past_vs_now = (back(c, k) - back(p, 0)).norm();
        const double moved = (back(c, 0) - back(c, k)).norm();
        return past_vs_now > d_t && moved > params.delta_min;
      });
    case Rule::kTtc:
      return first_pair(split, [&](const DecisionTrack& c, const DecisionTrack& p) {
        const Eigen::Vector2d rel = back(c, 0) - back(p, 0);
        const double gap = rel.norm();
        if (gap == 0.0) return true;
        const double closing = -rel.dot(c.velocity - p.velocity) / gap * fps;
        return closing > 0.0 && gap / closing < kTtcThreshold;
      });
  }
  return {State::kWarning, std::nullopt};
}

DecisionState decide_with(Rule rule, const std::vector<DecisionTrack>& tracks,
                          const CyclistMemory& memory, int frame, const PipelineParams& params,
                          double fps) {
  if (rule == Rule::kPairwise) return decide(tracks, memory, frame, params);
  return baseline_decide(rule, tracks, memory, frame, params, fps);
}

}  // namespace crosswarn::decision
