#include "crosswarn/sensor/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crosswarn/geometry/bbox.hpp"

namespace crosswarn::sensor {

RecallCurve::RecallCurve(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
  if (points_.empty()) throw std::invalid_argument("recall curve needs at least one breakpoint");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto [area, recall] = points_[i];
    if (!(area > 0.0)) throw std::invalid_argument("recall curve areas must be positive");
    if (!(recall >= 0.0 && recall <= 1.0)) throw std::invalid_argument("recall must lie in [0, 1]");
    if (i > 0) {
      if (!(area > points_[i - 1].first)) throw std::invalid_argument("recall curve areas must increase");
      if (recall < points_[i - 1].second) throw std::invalid_argument("recall must not decrease with area");
    }
  }
}

double RecallCurve::operator()(double area_px2) const {
  if (points_.empty()) return 1.0;
  if (area_px2 <= points_.front().first) return points_.front().second;
  if (area_px2 >= points_.back().first) return points_.back().second;
  const auto it = std::upper_bound(points_.begin(), points_.end(), area_px2,
                                   [](double a, const auto& p) { return a < p.first; });
  const auto& [a1, r1] = *it;
  const auto& [a0, r0] = *(it - 1);
  const double u = std::log(area_px2 / a0) / std::log(a1 / a0);
  return r0 + u * (r1 - r0);
}

RecallCurve RecallCurve::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open recall curve " + path.string());
  const auto j = nlohmann::json::parse(in);
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : j) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return RecallCurve(std::move(pts));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double uniform_draw(std::uint64_t seed, std::uint64_t trial, std::uint64_t camera,
                    std::string_view agent_id, std::int64_t frame) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ camera);
  h = splitmix64(h ^ fnv1a(agent_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(frame));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void SensorConfig::validate() const {
  if (cameras.empty()) throw std::invalid_argument("sensor needs at least one camera");
  if (latency_frames < 0 || latency_frames > kMaxLatencyFrames) {
    throw std::invalid_argument("latency_frames must be in [0, 15]");
  }
  if (yolo_input_px <= 0) throw std::invalid_argument("yolo_input_px must be positive");
  for (const auto& c : cameras) c.model.validate();
}

CameraView view_agent(const SensorCamera& cam, const AgentState& agent, bool apply_loc_error,
                      int yolo_input_px) {
  CameraView view;
  view.true_xy = scenario::world_to_camera(cam.pose, agent.position);
  const Eigen::Vector2d vel = scenario::world_to_camera_direction(cam.pose, agent.velocity);
  const double heading = vel.norm() > 1e-9 ? std::atan2(vel.y(), vel.x()) : 0.0;
  const geometry::Box3D box{view.true_xy, agent.dims, heading};

  geometry::ImageRect rect;
  try {
    rect = geometry::project_box_to_bbox(cam.model, box);
  } catch (const geometry::NotVisibleError&) {
    return view;
  }
  const int u = static_cast<int>(std::lround(rect.bottom_center().x()));
  const int v = static_cast<int>(std::lround(rect.bottom_center().y()));
  const auto ground = cam.lut ? cam.lut->at(u, v) : geometry::ground_at_pixel(cam.model, u, v);
  if (!ground) return view;

  const double scale = static_cast<double>(yolo_input_px) / cam.model.width;
  view.in_view = true;
  view.area_px2 = rect.width() * rect.height() * scale * scale;
  view.observed_xy = apply_loc_error ? *ground : view.true_xy;
  return view;
}

std::vector<std::optional<CameraDetection>> detect_views(int frame, const AgentState& agent,
                                                        const std::vector<CameraView>& views,
                                                        const SensorConfig& cfg) {
  const CameraPose& primary = cfg.cameras.front().pose;
  std::vector<std::optional<CameraDetection>> out(views.size());
  if (agent.occluded) return out;
  for (std::size_t c = 0; c < views.size(); ++c) {
    const auto& view = views[c];
    if (!view.in_view) continue;
    if (cfg.stochastic &&
        uniform_draw(cfg.seed, cfg.trial, c, agent.id, frame) >= cfg.curve(view.area_px2)) {
      continue;
    }
    CameraDetection d;
    d.error_m = (view.observed_xy - view.true_xy).norm();
    d.xy = c == 0 ? view.observed_xy
                  : scenario::world_to_camera(primary, scenario::camera_to_world(cfg.cameras[c].pose,
                                                                                 view.observed_xy));
    out[c] = d;
  }
  return out;
}

namespace {

Observation base_observation(int frame, const AgentState& agent, const std::vector<CameraView>& views,
                             const SensorConfig& cfg) {
  Observation obs;
  obs.frame = frame;
  obs.agent_id = agent.id;
  obs.cls = agent.cls;
  obs.true_xy = scenario::world_to_camera(cfg.cameras.front().pose, agent.position);
  for (const auto& v : views) {
    if (v.in_view) obs.area_px2 = std::max(obs.area_px2, v.area_px2);
  }
  return obs;
}

int lowest_error(const std::vector<std::optional<CameraDetection>>& dets) {
  int best = -1;
  for (std::size_t c = 0; c < dets.size(); ++c) {
    if (dets[c] && (best < 0 || dets[c]->error_m < dets[best]->error_m)) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

Observation fuse_views(int frame, const AgentState& agent, const std::vector<CameraView>& views,
                       const SensorConfig& cfg) {
  Observation obs = base_observation(frame, agent, views, cfg);
  const auto dets = detect_views(frame, agent, views, cfg);
  const int c = lowest_error(dets);
  if (c < 0) return obs;
  obs.observed_xy = dets[c]->xy;
  obs.localization_error_m = dets[c]->error_m;
  obs.camera = c;
  obs.detected = true;
  return obs;
}

Observation CameraFusion::fuse(int frame, const AgentState& agent, const std::vector<CameraView>& views,
                               const SensorConfig& cfg) {
  Observation obs = base_observation(frame, agent, views, cfg);
  const auto dets = detect_views(frame, agent, views, cfg);
  auto& st = agents_[agent.id];
  st.offset.resize(views.size());

  // the lowest-index camera with the agent in view owns it
  int owner = -1;
  for (std::size_t c = 0; c < views.size() && owner < 0; ++c) {
    if (views[c].in_view) owner = static_cast<int>(c);
  }
  if (owner < 0) return obs;
  if (owner != st.owner) {
    st.owner = owner;
    std::fill(st.offset.begin(), st.offset.end(), std::nullopt);
  }

  Eigen::Vector2d xy;
  int used = st.owner;
  if (dets[st.owner]) {
    xy = dets[st.owner]->xy;
    for (std::size_t c = 0; c < dets.size(); ++c) {
      if (!dets[c] || static_cast<int>(c) == st.owner) continue;
      st.offset[c] = xy - dets[c]->xy;
    }
  } else {
    // only cameras already registered against the owner for this agent
    used = -1;
    for (std::size_t c = 0; c < dets.size(); ++c) {
      if (dets[c] && st.offset[c] && (used < 0 || dets[c]->error_m < dets[used]->error_m)) {
        used = static_cast<int>(c);
      }
    }
    if (used < 0) return obs;
    xy = dets[used]->xy + *st.offset[used];
  }
  obs.observed_xy = xy;
  obs.localization_error_m = (xy - obs.true_xy).norm();
  obs.camera = used;
  obs.detected = true;
  return obs;
}

std::vector<Observation> observe(int frame, const std::vector<AgentState>& agents,
                                 const SensorConfig& cfg) {
  std::vector<Observation> out;
  out.reserve(agents.size());
  std::vector<CameraView> views(cfg.cameras.size());
  for (const auto& agent : agents) {
    for (std::size_t c = 0; c < cfg.cameras.size(); ++c) {
      views[c] = view_agent(cfg.cameras[c], agent, cfg.apply_loc_error, cfg.yolo_input_px);
    }
    out.push_back(fuse_views(frame, agent, views, cfg));
  }
  return out;
}

double fused_detection_probability(const std::vector<double>& per_camera) {
  double miss = 1.0;
  for (double p : per_camera) miss *= 1.0 - p;
  return 1.0 - miss;
}

DelayBuffer::DelayBuffer(int latency_frames) : latency_(latency_frames) {
  if (latency_frames < 0) throw std::invalid_argument("latency_frames must be non-negative");
}

std::vector<Observation> DelayBuffer::push(std::vector<Observation> frame_observations) {
  queue_.push_back(std::move(frame_observations));
  if (static_cast<int>(queue_.size()) <= latency_) return {};
  auto out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

}  // namespace crosswarn::sensor
