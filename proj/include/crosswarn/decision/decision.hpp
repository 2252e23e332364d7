#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "crosswarn/scenario/scenario.hpp"
#include "crosswarn/sensor/sensor.hpp"

namespace crosswarn::decision {

using scenario::DetectorClass;

struct TrackPoint {
  int frame = 0;
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
  bool observed = true;  // false for coasted entries
};

struct TrackedObject {
  int id = 0;
  DetectorClass cls = DetectorClass::kPerson;
  std::vector<TrackPoint> history;  // one entry per frame, oldest first
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();      // m per frame, smoothed
  Eigen::Vector2d acceleration = Eigen::Vector2d::Zero();  // m per frame^2, smoothed
  int last_seen = 0;
  Eigen::Vector2d last_observed = Eigen::Vector2d::Zero();

  const Eigen::Vector2d& position() const { return history.back().xy; }
};

struct TrackerParams {
  double gate_m = 3.0;
  double alpha = 0.5;
  int max_coast_frames = 300;  // 10 s at 30 fps
  std::size_t max_history = 120;
};

/// Greedy nearest-neighbour tracker on the ground plane.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {}) : params_(params) {}

  /// Undetected observations are ignored.
  void update(const std::vector<sensor::Observation>& observations, int frame);
  const std::vector<TrackedObject>& tracks() const { return tracks_; }

 private:
  TrackerParams params_;
  std::vector<TrackedObject> tracks_;
  int next_id_ = 1;
};

/// Displacement over the last 4 frames divided by 4/fps.
std::optional<double> estimate_speed(const TrackedObject& track, double fps);

/// Latency compensation: order 0 stale, 1 adds n*v, 2 adds n*v + a*n^2/2.
Eigen::Vector2d predict(const TrackedObject& track, int delay_frames, int order);

inline constexpr int kMaxLookback = 30;

struct PipelineParams {
  int n_memory = 58;
  double d_min = 1.9;
  double d_max = 24.8;
  double delta_min = 0.147;
  int k_lookback = 2;

  void validate() const;
};

enum class State { kIdle, kSafe, kWarning, kAlert };
std::string_view to_string(State s);

struct DecisionState {
  State state = State::kIdle;
  std::optional<std::pair<int, int>> pair;  // (cyclist track, pedestrian track) iff ALERT
};

/// Remembers the last frame with a bike detection.
class CyclistMemory {
 public:
  void record(int frame, bool bike_detected);
  bool recent(int frame, int n_frames) const;

 private:
  std::optional<int> last_;
};

/// Positions handed to the decision rules: one entry per frame, oldest first.
struct DecisionTrack {
  int id = 0;
  DetectorClass cls = DetectorClass::kPerson;
  std::vector<Eigen::Vector2d> history;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // m per frame
};

enum class Rule { kPairwise, kDistanceOnly, kNaiveClosing, kTtc };
std::string_view to_string(Rule r);
Rule rule_from_string(std::string_view s);

inline constexpr double kDistanceOnlyThreshold = 10.0;
inline constexpr double kTtcThreshold = 3.0;

/// Three-stage pipeline (pedestrian presence, cyclist memory, pairwise closing).
DecisionState decide(const std::vector<DecisionTrack>& tracks, const CyclistMemory& memory,
                     int frame, const PipelineParams& params);

/// Baselines share the presence and memory stages with decide().
DecisionState baseline_decide(Rule rule, const std::vector<DecisionTrack>& tracks,
                              const CyclistMemory& memory, int frame, const PipelineParams& params,
                              double fps);

DecisionState decide_with(Rule rule, const std::vector<DecisionTrack>& tracks,
                          const CyclistMemory& memory, int frame, const PipelineParams& params,
                          double fps);

/// Telemetry message for one frame.
nlohmann::json telemetry_message(int frame, double fps, const std::vector<TrackedObject>& tracks);

/// Tracker plus latency compensation, producing the per-frame decision input.
class Perception {
 public:
  Perception(int latency_frames, int predictor_order, TrackerParams params = {});

  /// Feed the (already delayed) observations of this frame.
  void step(const std::vector<sensor::Observation>& observations, int frame);

  const std::vector<DecisionTrack>& decision_tracks() const { return decision_tracks_; }
  const Tracker& tracker() const { return tracker_; }
  bool bike_detected() const { return bike_detected_; }

 private:
  Tracker tracker_;
  int latency_;
  int order_;
  std::size_t max_history_;
  std::map<int, DecisionTrack> compensated_;
  std::vector<DecisionTrack> decision_tracks_;
  bool bike_detected_ = false;
};

}  // namespace crosswarn::decision
