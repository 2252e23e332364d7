#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "crosswarn/geometry/camera_model.hpp"

namespace crosswarn::calibration {

using geometry::CameraModel;
using geometry::LensModel;

/// Planar checkerboard: cols x rows inner corners, square size in metres.
struct BoardSpec {
  int cols = 9;
  int rows = 6;
  double square_m = 0.1;

  std::vector<Eigen::Vector3d> corners() const;
};

/// Board-to-camera transform, P_cam = R(rotation) * X + translation.
struct Pose {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();  // axis-angle
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix3d rotation_matrix() const;
  static Pose from(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);
};

struct CalibrationFrame {
  std::vector<Eigen::Vector3d> board_points;
  std::vector<Eigen::Vector2d> image_points;
  Pose pose;  // generating pose for synthetic data; ignored by the solver
};

struct Intrinsics {
  double cx = 0.0;
  double cy = 0.0;
  double focal_px = 0.0;
};

struct TraceEntry {
  int pass = 1;  // 1 = least squares, 2 = soft-l1
  int iteration = 0;
  double cost = 0.0;
  double lambda = 0.0;
  bool accepted = false;
};

struct CalibrationResult {
  LensModel lens = LensModel::kEquidistant;
  Intrinsics intrinsics;
  std::vector<Pose> poses;
  double initial_rms_px = 0.0;
  double rms_px = 0.0;  // root mean square over residual components
  std::map<LensModel, double> per_model_rms;
  std::vector<TraceEntry> trace;
};

/// Raised when LM exhausts its iteration budget. Carries the best state.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, CalibrationResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const CalibrationResult& best() const { return best_; }

 private:
  CalibrationResult best_;
};

struct LmOptions {
  double initial_lambda = 1e-3;
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  bool robust_pass = true;
};

/// Random board poses seen by `truth`, image points = projection + N(0, noise_px)
/// per axis. Deterministic for a given seed.
std::vector<CalibrationFrame> synthesize_frames(const CameraModel& truth, int n_frames,
                                                const BoardSpec& board, double noise_px,
                                                std::uint64_t seed);

/// Coarse starting model: optical centre at the crop centre, focal length from
/// the crop diameter and a nominal field of view.
CameraModel coarse_initialization(const CameraModel& reference, double nominal_fov_deg);

/// Projects a camera-frame point through the lens with the given intrinsics.
/// Unlike geometry::ground_to_pixel this is defined over the whole sphere
/// except the backward axis, so the optimizer never sees holes.
Eigen::Vector2d project_point(LensModel lens, const Intrinsics& k, const Eigen::Vector3d& p);

/// Per-frame pose from bearing vectors of the image points (planar DLT).
Pose initial_pose(const CalibrationFrame& frame, const CameraModel& initial);

/// Joint LM over (cx, cy, f) and all poses; optional soft-l1 second pass.
CalibrationResult bundle_adjust(const std::vector<CalibrationFrame>& frames, LensModel lens,
                                const CameraModel& initial, const LmOptions& options = {});

/// Fits every lens model independently. Failed fits are reported as infinity.
std::map<LensModel, double> compare_models(const std::vector<CalibrationFrame>& frames,
                                           const CameraModel& initial,
                                           const LmOptions& options = {});

/// RMS over residual components of `frames` under the given model and poses.
double reprojection_rms(const std::vector<CalibrationFrame>& frames, LensModel lens,
                        const Intrinsics& k, const std::vector<Pose>& poses);

/// The reprojection objective, exposed for gradient checks.
class ReprojectionProblem {
 public:
  struct State {
    Intrinsics intrinsics;
    std::vector<Eigen::Matrix3d> rotations;
    std::vector<Eigen::Vector3d> translations;
  };

  /// Squared loss when robust_scale <= 0, soft-l1 with that scale otherwise.
  struct Loss {
    double robust_scale = 0.0;
  };

  ReprojectionProblem(const std::vector<CalibrationFrame>& frames, LensModel lens);

  int num_parameters() const;
  int num_residuals() const;

  /// Local update: intrinsics additive, rotation left-multiplied by exp(delta).
  State apply(const State& s, const Eigen::VectorXd& delta) const;

  double cost(const State& s, const Loss& loss) const;
  double sum_squared(const State& s) const;

  /// Gauss-Newton Hessian approximation and exact gradient of cost().
  void normal_equations(const State& s, const Loss& loss, Eigen::MatrixXd& hessian,
                        Eigen::VectorXd& gradient) const;

 private:
  const std::vector<CalibrationFrame>& frames_;
  LensModel lens_;
  int num_points_ = 0;
};

void write_trace_jsonl(const std::filesystem::path& path, const std::vector<TraceEntry>& trace);

}  // namespace crosswarn::calibration
