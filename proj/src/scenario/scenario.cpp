#include "crosswarn/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crosswarn::scenario {

namespace {

constexpr std::pair<AgentClass, std::string_view> kClassNames[] = {
    {AgentClass::kPedestrian, "pedestrian"}, {AgentClass::kWheelchair, "wheelchair"},
    {AgentClass::kChild, "child"},           {AgentClass::kCyclist, "cyclist"},
    {AgentClass::kEbike, "ebike"},           {AgentClass::kCar, "car"}};

constexpr std::pair<Category, std::string_view> kCategoryNames[] = {
    {Category::kSafe, "safe"},
    {Category::kStandard, "standard"},
    {Category::kHighSpeed, "high_speed"},
    {Category::kAccessibility, "accessibility"},
    {Category::kMultiAgent, "multi_agent"},
    {Category::kEdgeCase, "edge_case"},
    {Category::kNonlinear, "nonlinear"}};

// Natural cubic spline second derivatives for one coordinate.
std::vector<double> spline_moments(const std::vector<Waypoint>& w, double Waypoint::*coord) {
  const std::size_t n = w.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = w[i].t - w[i - 1].t;
    const double h1 = w[i + 1].t - w[i].t;
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((w[i + 1].*coord - w[i].*coord) / h1 - (w[i].*coord - w[i - 1].*coord) / h0);
  }
  // Thomas algorithm over the interior unknowns; the lower band equals h0.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = w[i].t - w[i - 1].t;
    const double factor = lower / diag[i - 1];
    diag[i] -= factor * upper[i - 1];
    rhs[i] -= factor * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return m;
}

double spline_eval(const std::vector<Waypoint>& w, const std::vector<double>& m,
                   double Waypoint::*coord, std::size_t seg, double t) {
  const double h = w[seg + 1].t - w[seg].t;
  const double a = (w[seg + 1].t - t) / h;
  const double b = (t - w[seg].t) / h;
  return a * w[seg].*coord + b * w[seg + 1].*coord +
         ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
}

constexpr double kTimeEps = 1e-9;

}  // namespace

std::string_view to_string(AgentClass c) {
  for (const auto& [k, name] : kClassNames) {
    if (k == c) return name;
  }
  return "pedestrian";
}

std::string_view to_string(DetectorClass c) {
  switch (c) {
    case DetectorClass::kPerson: return "person";
    case DetectorClass::kBike: return "bike";
    case DetectorClass::kCar: return "car";
  }
  return "person";
}

std::string_view to_string(Interpolation i) {
  return i == Interpolation::kCubic ? "cubic" : "linear";
}

std::string_view to_string(Category c) {
  for (const auto& [k, name] : kCategoryNames) {
    if (k == c) return name;
  }
  return "standard";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::kNone: return "none";
    case Tier::kActionable: return "actionable";
    case Tier::kImminent: return "imminent";
  }
  return "none";
}

AgentClass agent_class_from_string(std::string_view s) {
  for (const auto& [k, name] : kClassNames) {
    if (name == s) return k;
  }
  throw ScenarioError("unknown agent class '" + std::string(s) + "'");
}

DetectorClass detector_class_from_string(std::string_view s) {
  if (s == "person") return DetectorClass::kPerson;
  if (s == "bike" || s == "motorcycle") return DetectorClass::kBike;
  if (s == "car") return DetectorClass::kCar;
  throw ScenarioError("unknown detector class '" + std::string(s) + "'");
}

Category category_from_string(std::string_view s) {
  for (const auto& [k, name] : kCategoryNames) {
    if (name == s) return k;
  }
  throw ScenarioError("unknown category '" + std::string(s) + "'");
}

DetectorClass detector_class(AgentClass c) {
  if (is_pedestrian(c)) return DetectorClass::kPerson;
  if (is_cyclist(c)) return DetectorClass::kBike;
  return DetectorClass::kCar;
}

bool is_pedestrian(AgentClass c) {
  return c == AgentClass::kPedestrian || c == AgentClass::kWheelchair || c == AgentClass::kChild;
}

bool is_cyclist(AgentClass c) { return c == AgentClass::kCyclist || c == AgentClass::kEbike; }

BoxDims default_dims(AgentClass c) {
  switch (c) {
    case AgentClass::kPedestrian: return geometry::kPedestrianDims;
    case AgentClass::kWheelchair: return {1.1, 0.7, 1.3};
    case AgentClass::kChild: return {0.4, 0.4, 1.2};
    case AgentClass::kCyclist:
    case AgentClass::kEbike: return geometry::kCyclistDims;
    case AgentClass::kCar: return geometry::kCarDims;
  }
  return geometry::kPedestrianDims;
}

void Agent::validate() const {
  if (id.empty()) throw ScenarioError("agent without id");
  if (waypoints.size() < 2) throw ScenarioError("agent '" + id + "' needs >= 2 waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].t > waypoints[i - 1].t)) {
      throw ScenarioError("agent '" + id + "' waypoint times must increase strictly");
    }
  }
  for (const auto& [t0, t1] : occluded) {
    if (!(t1 >= t0)) throw ScenarioError("agent '" + id + "' has an inverted occlusion window");
  }
}

bool Agent::present_at(double t) const {
  return t >= t_begin() - kTimeEps && t <= t_end() + kTimeEps;
}

bool Agent::occluded_at(double t) const {
  return std::any_of(occluded.begin(), occluded.end(), [t](const auto& w) {
    return t >= w.first - kTimeEps && t <= w.second + kTimeEps;
  });
}

Eigen::Vector2d Agent::position(double t) const {
  t = std::clamp(t, t_begin(), t_end());
  const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.t; });
  std::size_t seg = static_cast<std::size_t>(std::distance(waypoints.begin(), it));
  seg = std::min(seg == 0 ? 0 : seg - 1, waypoints.size() - 2);
  if (interpolation == Interpolation::kLinear || waypoints.size() < 3) {
    const auto& a = waypoints[seg];
    const auto& b = waypoints[seg + 1];
    const double u = (t - a.t) / (b.t - a.t);
    return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
  }
  const auto mx = spline_moments(waypoints, &Waypoint::x);
  const auto my = spline_moments(waypoints, &Waypoint::y);
  return {spline_eval(waypoints, mx, &Waypoint::x, seg, t),
          spline_eval(waypoints, my, &Waypoint::y, seg, t)};
}

void Scenario::validate() const {
  if (id.empty()) throw ScenarioError("scenario without id");
  if (!(fps > 0.0)) throw ScenarioError("scenario '" + id + "' fps must be positive");
  if (!(duration_s > 0.0)) throw ScenarioError("scenario '" + id + "' duration must be positive");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (agents[j].id == agents[i].id) throw ScenarioError("duplicate agent id '" + agents[i].id + "'");
    }
  }
}

int Scenario::frame_count() const { return static_cast<int>(std::floor(duration_s * fps + 1e-9)); }

std::vector<AgentState> positions_at(const Scenario& s, int frame) {
  if (frame < 0 || frame >= s.frame_count()) {
    throw std::out_of_range("frame " + std::to_string(frame) + " outside scenario '" + s.id + "'");
  }
  const double t = s.time_of(frame);
  const double dt = 1.0 / s.fps;
  std::vector<AgentState> out;
  for (const auto& a : s.agents) {
    if (!a.present_at(t)) continue;
    AgentState st;
    st.id = a.id;
    st.cls = a.cls;
    st.dims = a.dims;
    st.position = a.position(t);
    st.occluded = a.occluded_at(t);
    const bool prev = a.present_at(t - dt);
    const bool next = a.present_at(t + dt);
    if (prev && next) {
      st.velocity = (a.position(t + dt) - a.position(t - dt)) / (2.0 * dt);
    } else if (next) {
      st.velocity = (a.position(t + dt) - st.position) / dt;
    } else if (prev) {
      st.velocity = (st.position - a.position(t - dt)) / dt;
    }
    out.push_back(std::move(st));
  }
  return out;
}

Eigen::Vector2d world_to_camera_direction(const CameraPose& pose, const Eigen::Vector2d& v) {
  const double yaw = pose.yaw_deg * std::numbers::pi / 180.0;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

Eigen::Vector2d world_to_camera(const CameraPose& pose, const Eigen::Vector2d& p_world) {
  return world_to_camera_direction(pose, p_world - Eigen::Vector2d(pose.x, pose.y));
}

Eigen::Vector2d camera_to_world(const CameraPose& pose, const Eigen::Vector2d& p_cam) {
  const double yaw = pose.yaw_deg * std::numbers::pi / 180.0;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return Eigen::Vector2d(c * p_cam.x() - s * p_cam.y(), s * p_cam.x() + c * p_cam.y()) +
         Eigen::Vector2d(pose.x, pose.y);
}

void GroundTruthParams::validate() const {
  const double all[] = {cpa_radius_m,    stop_margin,     ttc_threshold_s, t_react_s,
                        decel_mps2,      ebike_decel_mps2, v_max_mps,      prt_distracted_s};
  for (double v : all) {
    if (!(v > 0.0)) throw std::invalid_argument("ground-truth parameters must be positive");
  }
  if (stop_margin > 1.5) throw std::invalid_argument("stop_margin must be in (0, 1.5]");
}

double stopping_distance(double speed_mps, double t_react_s, double decel_mps2) {
  return speed_mps * t_react_s + speed_mps * speed_mps / (2.0 * decel_mps2);
}

double swerve_time(double lateral_m, double mu, double t_react_s) {
  if (!(lateral_m >= 0.0) || !(mu > 0.0)) throw std::invalid_argument("swerve_time needs w >= 0, mu > 0");
  constexpr double kGravity = 9.81;
  return t_react_s + std::sqrt(2.0 * lateral_m / (mu * kGravity));
}

std::vector<FrameLabel> label_frames(const Scenario& s, const GroundTruthParams& gt) {
  gt.validate();
  const int frames = s.frame_count();
  std::vector<FrameLabel> labels(frames);

  // positions and speeds per agent per frame, NaN where absent
  const std::size_t n_agents = s.agents.size();
  std::vector<std::vector<std::optional<AgentState>>> states(
      n_agents, std::vector<std::optional<AgentState>>(frames));
  for (int f = 0; f < frames; ++f) {
    for (auto& st : positions_at(s, f)) {
      for (std::size_t i = 0; i < n_agents; ++i) {
        if (s.agents[i].id == st.id) {
          states[i][f] = std::move(st);
          break;
        }
      }
    }
  }

  for (std::size_t ci = 0; ci < n_agents; ++ci) {
    if (!is_cyclist(s.agents[ci].cls)) continue;
    const double decel = s.agents[ci].cls == AgentClass::kEbike ? gt.ebike_decel_mps2 : gt.decel_mps2;
    for (std::size_t pi = 0; pi < n_agents; ++pi) {
      if (!is_pedestrian(s.agents[pi].cls)) continue;

      std::vector<double> gap(frames, kInfinity);
      for (int f = 0; f < frames; ++f) {
        if (states[ci][f] && states[pi][f]) gap[f] = (states[ci][f]->position - states[pi][f]->position).norm();
      }
      // closest approach over the remaining joint lifetime
      std::vector<double> cpa(frames, kInfinity);
      std::vector<int> cpa_at(frames, -1);
      for (int f = frames - 1; f >= 0; --f) {
        if (!std::isfinite(gap[f])) continue;
        const bool joint_next = f + 1 < frames && std::isfinite(gap[f + 1]);
        if (joint_next && cpa[f + 1] < gap[f]) {
          cpa[f] = cpa[f + 1];
          cpa_at[f] = cpa_at[f + 1];
        } else {
          cpa[f] = gap[f];
          cpa_at[f] = f;
        }
      }

      for (int f = 0; f + 1 < frames; ++f) {
        if (!std::isfinite(gap[f]) || !std::isfinite(gap[f + 1])) continue;
        // the cyclist must be moving: a pedestrian walking up to a stopped bike is not a threat
        const double v = states[ci][f]->velocity.norm();
        if (!(gap[f + 1] < gap[f]) || !(v > 0.0)) continue;
        if (!(cpa[f] <= gt.cpa_radius_m)) continue;
        const double ttc = (cpa_at[f] - f) / s.fps;
        const double d_stop = stopping_distance(v, gt.t_react_s, decel);
        if (!(d_stop > gt.stop_margin * gap[f] || ttc < gt.ttc_threshold_s)) continue;

        const double severity = std::min(v * v / (gt.v_max_mps * gt.v_max_mps), 1.0);
        FrameLabel& label = labels[f];
        const auto pair = std::make_pair(s.agents[ci].id, s.agents[pi].id);
        const bool worse = !label.dangerous || severity > label.severity ||
                           (severity == label.severity &&
                            (ttc < label.ttc_s || (ttc == label.ttc_s && pair < *label.pair)));
        if (!worse) continue;
        label.dangerous = true;
        label.tier = ttc >= gt.prt_distracted_s ? Tier::kActionable : Tier::kImminent;
        label.severity = severity;
        label.ttc_s = ttc;
        label.cpa_m = cpa[f];
        label.cpa_frame = cpa_at[f];
        label.pair = pair;
      }
      for (int f = 0; f < frames; ++f) {
        if (!labels[f].dangerous && std::isfinite(cpa[f])) {
          labels[f].cpa_m = std::min(labels[f].cpa_m, cpa[f]);
        }
      }
    }
  }
  return labels;
}

const Scenario* Suite::find(std::string_view id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

}  // namespace crosswarn::scenario
