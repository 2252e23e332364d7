#include <algorithm>
#include <cmath>
#include <tuple>

#include <nlohmann/json.hpp>

#include "crosswarn/decision/decision.hpp"

namespace crosswarn::decision {

void Tracker::update(const std::vector<sensor::Observation>& observations, int frame) {
  std::vector<const sensor::Observation*> obs;
  for (const auto& o : observations) {
    if (o.detected && o.observed_xy) obs.push_back(&o);
  }

  std::vector<std::tuple<double, int, std::size_t, std::size_t>> candidates;
  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    const auto& t = tracks_[ti];
    const Eigen::Vector2d predicted = t.position() + t.velocity * (frame - t.history.back().frame);
    for (std::size_t oi = 0; oi < obs.size(); ++oi) {
      if (scenario::detector_class(obs[oi]->cls) != t.cls) continue;
      const double d = (*obs[oi]->observed_xy - predicted).norm();
      if (d <= params_.gate_m) candidates.emplace_back(d, t.id, oi, ti);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<bool> track_used(tracks_.size(), false);
  std::vector<bool> obs_used(obs.size(), false);
  for (const auto& [d, id, oi, ti] : candidates) {
    if (track_used[ti] || obs_used[oi]) continue;
    track_used[ti] = true;
    obs_used[oi] = true;
    auto& t = tracks_[ti];
    const Eigen::Vector2d z = *obs[oi]->observed_xy;
    const Eigen::Vector2d sample = (z - t.last_observed) / static_cast<double>(frame - t.last_seen);
    const Eigen::Vector2d v = params_.alpha * sample + (1.0 - params_.alpha) * t.velocity;
    t.acceleration = params_.alpha * (v - t.velocity) + (1.0 - params_.alpha) * t.acceleration;
    t.velocity = v;
    t.last_seen = frame;
    t.last_observed = z;
    t.history.push_back({frame, z, true});
  }

  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    if (track_used[ti]) continue;
    auto& t = tracks_[ti];
    t.history.push_back({frame, t.position() + t.velocity, false});
  }
  std::erase_if(tracks_, [&](const TrackedObject& t) {
    return frame - t.last_seen > params_.max_coast_frames;
  });
  for (auto& t : tracks_) {
    if (t.history.size() > params_.max_history) {
      t.history.erase(t.history.begin(),
                      t.history.begin() + static_cast<long>(t.history.size() - params_.max_history));
    }
  }

  for (std::size_t oi = 0; oi < obs.size(); ++oi) {
    if (obs_used[oi]) continue;
    TrackedObject t;
    t.id = next_id_++;
    t.cls = scenario::detector_class(obs[oi]->cls);
    t.last_seen = frame;
    t.last_observed = *obs[oi]->observed_xy;
    t.history.push_back({frame, t.last_observed, true});
    tracks_.push_back(std::move(t));
  }
}

std::optional<double> estimate_speed(const TrackedObject& track, double fps) {
  constexpr std::size_t kWindow = 4;
  if (track.history.size() < kWindow + 1) return std::nullopt;
  const auto& now = track.history.back();
  const auto& then = track.history[track.history.size() - 1 - kWindow];
  return (now.xy - then.xy).norm() / ((now.frame - then.frame) / fps);
}

Eigen::Vector2d predict(const TrackedObject& track, int delay_frames, int order) {
  const double n = delay_frames;
  Eigen::Vector2d p = track.position();
  if (order >= 1) p += n * track.velocity;
  if (order >= 2) p += 0.5 * n * n * track.acceleration;
  return p;
}

nlohmann::json telemetry_message(int frame, double fps, const std::vector<TrackedObject>& tracks) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& t : tracks) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : t.history) history.push_back({h.frame, h.xy.x(), h.xy.y()});
    objects.push_back({{"id", t.id},
                       {"class", to_string(t.cls)},
                       {"pos", {t.position().x(), t.position().y()}},
                       {"vel", {t.velocity.x() * fps, t.velocity.y() * fps}},
                       {"history", history}});
  }
  return {{"ts", frame / fps}, {"frame", frame}, {"objects", objects}};
}

Perception::Perception(int latency_frames, int predictor_order, TrackerParams params)
    : tracker_(params), latency_(latency_frames), order_(predictor_order),
      max_history_(kMaxLookback + 1) {
  if (predictor_order < 0 || predictor_order > 2) throw std::invalid_argument("predictor order must be 0, 1 or 2");
}

void Perception::step(const std::vector<sensor::Observation>& observations, int frame) {
  bike_detected_ = std::any_of(observations.begin(), observations.end(), [](const auto& o) {
    return o.detected && scenario::detector_class(o.cls) == DetectorClass::kBike;
  });
  tracker_.update(observations, frame);

  std::map<int, DecisionTrack> next;
  for (const auto& t : tracker_.tracks()) {
    auto it = compensated_.find(t.id);
    DecisionTrack d;
    if (it != compensated_.end()) d = std::move(it->second);
    d.id = t.id;
    d.cls = t.cls;
    d.velocity = t.velocity;
    d.history.push_back(predict(t, latency_, order_));
    if (d.history.size() > max_history_) d.history.erase(d.history.begin());
    next.emplace(t.id, std::move(d));
  }
  compensated_ = std::move(next);
  decision_tracks_.clear();
  for (const auto& [id, d] : compensated_) decision_tracks_.push_back(d);
}

}  // namespace crosswarn::decision
