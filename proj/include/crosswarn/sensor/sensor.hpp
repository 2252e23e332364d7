#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "crosswarn/geometry/camera_model.hpp"
#include "crosswarn/geometry/ground_lut.hpp"
#include "crosswarn/scenario/scenario.hpp"

namespace crosswarn::sensor {

using geometry::CameraModel;
using scenario::AgentClass;
using scenario::AgentState;
using scenario::CameraPose;

/// Detection recall as a function of projected box area at detector input
/// scale. Linear in log-area between breakpoints, clamped at both ends.
class RecallCurve {
 public:
  RecallCurve() = default;
  explicit RecallCurve(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double area_px2) const;
  const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

  static RecallCurve load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<double, double>> points_;
};

/// Stateless uniform draws keyed by (seed, trial, camera, agent, frame), so a
/// draw does not depend on iteration order or on which other agents exist.
double uniform_draw(std::uint64_t seed, std::uint64_t trial, std::uint64_t camera,
                    std::string_view agent_id, std::int64_t frame);

struct SensorCamera {
  CameraPose pose;
  CameraModel model;
  std::shared_ptr<const geometry::GroundLut> lut;  // optional; same values as on-demand
};

struct SensorConfig {
  bool apply_loc_error = true;
  bool stochastic = false;
  RecallCurve curve;
  int latency_frames = 0;
  int yolo_input_px = 1280;
  std::vector<SensorCamera> cameras;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;

  void validate() const;
};

inline constexpr int kMaxLatencyFrames = 15;

struct Observation {
  int frame = 0;
  std::string agent_id;
  AgentClass cls = AgentClass::kPedestrian;
  Eigen::Vector2d true_xy = Eigen::Vector2d::Zero();  // primary camera frame
  std::optional<Eigen::Vector2d> observed_xy;         // primary camera frame
  bool detected = false;
  double localization_error_m = 0.0;
  int camera = -1;  // camera that supplied the position
  double area_px2 = 0.0;  // largest per-camera area at detector scale
};

/// Per-camera view of one agent.
struct CameraView {
  bool in_view = false;
  double area_px2 = 0.0;
  Eigen::Vector2d true_xy = Eigen::Vector2d::Zero();      // this camera's frame
  Eigen::Vector2d observed_xy = Eigen::Vector2d::Zero();  // this camera's frame
};

CameraView view_agent(const SensorCamera& cam, const AgentState& agent, bool apply_loc_error,
                      int yolo_input_px);

struct CameraDetection {
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();  // primary camera frame
  double error_m = 0.0;
};

/// Detection draw per camera; nullopt where the camera misses the agent.
std::vector<std::optional<CameraDetection>> detect_views(int frame, const AgentState& agent,
                                                        const std::vector<CameraView>& views,
                                                        const SensorConfig& cfg);

/// Detection draw and multi-camera fusion for one agent given its per-camera
/// views. The position comes from the detecting camera with the smallest
/// localization error, expressed in the primary camera frame.
Observation fuse_views(int frame, const AgentState& agent, const std::vector<CameraView>& views,
                       const SensorConfig& cfg);

/// Fusion with a fixed position source per agent. The lowest-index camera
/// that has the agent in view owns it. When the owner misses a frame, the
/// lowest-error camera already registered against the owner fills in,
/// shifted by the offset to the owner measured while both saw the agent, so
/// each camera's own bias does not show up as motion. With one camera this equals fuse_views.
class CameraFusion {
 public:
  Observation fuse(int frame, const AgentState& agent, const std::vector<CameraView>& views,
                   const SensorConfig& cfg);

 private:
  struct Handoff {
    int owner = -1;
    std::vector<std::optional<Eigen::Vector2d>> offset;  // owner minus this camera
  };
  std::map<std::string, Handoff> agents_;
};

/// One observation per agent; undetected agents carry no position.
std::vector<Observation> observe(int frame, const std::vector<AgentState>& agents,
                                 const SensorConfig& cfg);

/// Fused detection probability for independent cameras.
double fused_detection_probability(const std::vector<double>& per_camera);

/// Emits frame t - latency at frame t; empty during the first `latency` frames.
class DelayBuffer {
 public:
  explicit DelayBuffer(int latency_frames);
  std::vector<Observation> push(std::vector<Observation> frame_observations);

 private:
  int latency_;
  std::deque<std::vector<Observation>> queue_;
};

}  // namespace crosswarn::sensor
