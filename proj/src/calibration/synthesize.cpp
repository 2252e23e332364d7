#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Geometry>

#include "crosswarn/calibration/calibration.hpp"
#include "projection.hpp"

namespace crosswarn::calibration {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxPoseAttempts = 2000;

}  // namespace

std::vector<Eigen::Vector3d> BoardSpec::corners() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.emplace_back(c * square_m, r * square_m, 0.0);
  }
  return out;
}

Eigen::Matrix3d Pose::rotation_matrix() const {
  const double angle = rotation.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, rotation / angle).toRotationMatrix();
}

Pose Pose::from(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  const Eigen::AngleAxisd aa(r);
  return Pose{aa.angle() * aa.axis(), t};
}

std::vector<CalibrationFrame> synthesize_frames(const CameraModel& truth, int n_frames,
                                                const BoardSpec& board, double noise_px,
                                                std::uint64_t seed) {
  if (n_frames < 3) throw std::invalid_argument("need at least 3 frames");
  if (noise_px < 0.0) throw std::invalid_argument("noise_px must be non-negative");
  truth.validate();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto points = board.corners();
  const Eigen::Vector3d board_center((board.cols - 1) * board.square_m / 2.0,
                                     (board.rows - 1) * board.square_m / 2.0, 0.0);
  const Intrinsics k{truth.optical_center.x(), truth.optical_center.y(), truth.focal_px};
  const double max_theta = truth.half_fov_rad() - 2.0 * kPi / 180.0;

  std::vector<CalibrationFrame> frames;
  frames.reserve(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPoseAttempts && !placed; ++attempt) {
      // board centre direction, spread over the whole field of view
      const double theta = max_theta * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      const Eigen::Vector3d dir(std::cos(theta), std::sin(theta) * std::cos(phi),
                                -std::sin(theta) * std::sin(phi));
      const double distance = 0.45 + 0.8 * unit(rng);

      // board normal faces the camera, tilted up to 45 degrees
      Eigen::Vector3d tilt_axis(gauss(rng), gauss(rng), gauss(rng));
      tilt_axis = (tilt_axis - tilt_axis.dot(dir) * dir).normalized();
      const double tilt = (kPi / 4.0) * unit(rng);
      const Eigen::Vector3d normal = Eigen::AngleAxisd(tilt, tilt_axis) * (-dir);
      Eigen::Vector3d ex = normal.unitOrthogonal();
      ex = Eigen::AngleAxisd(2.0 * kPi * unit(rng), normal) * ex;
      const Eigen::Vector3d ey = normal.cross(ex);
      Eigen::Matrix3d r;
      r.col(0) = ex;
      r.col(1) = ey;
      r.col(2) = normal;
      const Eigen::Vector3d t = distance * dir - r * board_center;

      CalibrationFrame frame;
      frame.pose = Pose::from(r, t);
      frame.board_points = points;
      frame.image_points.reserve(points.size());
      bool ok = true;
      for (const auto& x : points) {
        const Eigen::Vector3d p = r * x + t;
        const double th = std::atan2(std::hypot(p.y(), p.z()), p.x());
        if (th > max_theta) {
          ok = false;
          break;
        }
        const Eigen::Vector2d uv = detail::project(truth.lens, k, p).uv;
        if (uv.x() < 0.0 || uv.y() < 0.0 || uv.x() >= truth.width || uv.y() >= truth.height) {
          ok = false;
          break;
        }
        frame.image_points.push_back(uv);
      }
      if (!ok) continue;
      for (auto& uv : frame.image_points) {
        uv += noise_px * Eigen::Vector2d(gauss(rng), gauss(rng));
      }
      frames.push_back(std::move(frame));
      placed = true;
    }
    if (!placed) throw std::runtime_error("could not place a calibration board inside the field of view");
  }
  return frames;
}

CameraModel coarse_initialization(const CameraModel& reference, double nominal_fov_deg) {
  CameraModel cam = reference;
  cam.optical_center = {reference.width / 2.0, reference.height / 2.0};
  cam.focal_px = geometry::focal_from_fov(static_cast<double>(reference.width), nominal_fov_deg);
  cam.fov_deg = nominal_fov_deg;
  return cam;
}

}  // namespace crosswarn::calibration
