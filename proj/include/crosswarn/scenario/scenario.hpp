#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "crosswarn/geometry/bbox.hpp"

namespace crosswarn::scenario {

using geometry::BoxDims;

enum class AgentClass { kPedestrian, kWheelchair, kChild, kCyclist, kEbike, kCar };

/// What the detector reports for an agent.
enum class DetectorClass { kPerson, kBike, kCar };

enum class Interpolation { kLinear, kCubic };

enum class Category { kSafe, kStandard, kHighSpeed, kAccessibility, kMultiAgent, kEdgeCase, kNonlinear };

inline constexpr Category kAllCategories[] = {
    Category::kSafe,          Category::kStandard,   Category::kHighSpeed, Category::kAccessibility,
    Category::kMultiAgent,    Category::kEdgeCase,   Category::kNonlinear};

std::string_view to_string(AgentClass c);
std::string_view to_string(DetectorClass c);
std::string_view to_string(Interpolation i);
std::string_view to_string(Category c);
AgentClass agent_class_from_string(std::string_view s);
DetectorClass detector_class_from_string(std::string_view s);
Category category_from_string(std::string_view s);

DetectorClass detector_class(AgentClass c);
bool is_pedestrian(AgentClass c);
bool is_cyclist(AgentClass c);
BoxDims default_dims(AgentClass c);

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Agent {
  std::string id;
  AgentClass cls = AgentClass::kPedestrian;
  BoxDims dims;
  std::vector<Waypoint> waypoints;
  Interpolation interpolation = Interpolation::kLinear;
  /// Time intervals during which the agent is hidden from every camera.
  std::vector<std::pair<double, double>> occluded;

  void validate() const;
  double t_begin() const { return waypoints.front().t; }
  double t_end() const { return waypoints.back().t; }
  bool present_at(double t) const;
  bool occluded_at(double t) const;
  /// Interpolated world position; pre: present_at(t).
  Eigen::Vector2d position(double t) const;
};

struct Scenario {
  std::string id;
  std::string name;
  Category category = Category::kStandard;
  double duration_s = 0.0;
  double fps = 30.0;
  std::vector<Agent> agents;

  void validate() const;
  int frame_count() const;
  double time_of(int frame) const { return frame / fps; }
};

struct AgentState {
  std::string id;
  AgentClass cls = AgentClass::kPedestrian;
  BoxDims dims;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // m/s
  bool occluded = false;
};

/// Agents present at the frame, in scenario order. Velocity by central
/// difference at fps, one-sided at the ends of an agent's lifetime.
std::vector<AgentState> positions_at(const Scenario& s, int frame);

/// Camera pose in the world frame. Yaw turns the camera forward axis (+x)
/// toward +y.
struct CameraPose {
  double x = 0.0;
  double y = 0.0;
  double yaw_deg = 0.0;
};

Eigen::Vector2d world_to_camera(const CameraPose& pose, const Eigen::Vector2d& p_world);
Eigen::Vector2d camera_to_world(const CameraPose& pose, const Eigen::Vector2d& p_cam);
/// Rotation part only, for velocities.
Eigen::Vector2d world_to_camera_direction(const CameraPose& pose, const Eigen::Vector2d& v);

struct GroundTruthParams {
  double cpa_radius_m = 5.0;
  double stop_margin = 0.8;
  double ttc_threshold_s = 3.0;
  double t_react_s = 0.84;
  double decel_mps2 = 1.96;
  double ebike_decel_mps2 = 6.0;
  double v_max_mps = 12.0;
  double prt_distracted_s = 1.87;

  void validate() const;
};

enum class Tier { kNone, kActionable, kImminent };
std::string_view to_string(Tier t);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct FrameLabel {
  bool dangerous = false;
  Tier tier = Tier::kNone;
  double severity = 0.0;
  double ttc_s = kInfinity;
  double cpa_m = kInfinity;
  int cpa_frame = -1;  // frame of closest approach for the labelled pair
  std::optional<std::pair<std::string, std::string>> pair;  // (cyclist, pedestrian)
};

double stopping_distance(double speed_mps, double t_react_s, double decel_mps2);
double swerve_time(double lateral_m, double mu, double t_react_s = 0.84);

/// Clairvoyant per-frame labels from full trajectories. A pair is closing when
/// its gap shrinks over the next frame while the cyclist is moving. Among
/// dangerous pairs the label keeps the highest severity, then the shortest TTC.
std::vector<FrameLabel> label_frames(const Scenario& s, const GroundTruthParams& gt);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

struct SuiteEntry {
  std::string id;
  std::string file;
  Category category = Category::kStandard;
};

struct Suite {
  std::vector<SuiteEntry> manifest;
  std::vector<Scenario> scenarios;

  const Scenario* find(std::string_view id) const;
};

/// Reads manifest.json and every scenario it lists.
Suite load_suite(const std::filesystem::path& dir);

}  // namespace crosswarn::scenario
