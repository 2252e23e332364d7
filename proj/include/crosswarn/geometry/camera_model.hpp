#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace crosswarn::geometry {

/// Radial lens mapping between incidence angle and image radius.
enum class LensModel { kEquidistant, kEquisolid, kOrthographic, kStereographic };

inline constexpr LensModel kAllLensModels[] = {LensModel::kEquidistant, LensModel::kEquisolid,
                                               LensModel::kOrthographic,
                                               LensModel::kStereographic};

std::string_view to_string(LensModel lens);
LensModel lens_from_string(std::string_view name);

class InvalidPixelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCameraError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Intrinsics plus mounting extrinsics of a fisheye camera.
///
/// Camera frame convention: x forward along the optical axis, y to the right,
/// z up. Image u grows to the right and v grows downward. The camera sits at
/// (0, 0, height_m) above the ground plane z = 0.
struct CameraModel {
  LensModel lens = LensModel::kEquidistant;
  double focal_px = 1013.3;
  Eigen::Vector2d optical_center{1752.7, 1804.5};
  int width = 3500;
  int height = 3500;
  double fov_deg = 197.9;
  double height_m = 3.66;
  double pitch_deg = 0.0;  // 0 = level, negative = downward

  /// Throws InvalidCameraError when an invariant is broken.
  void validate() const;

  double half_fov_rad() const;
};

/// f = D * 180 / (fov * pi), D being the fisheye image diameter in pixels.
double focal_from_fov(double diameter_px, double fov_deg);

/// Forward lens map theta -> r. Empty when theta is outside the lens domain.
std::optional<double> lens_forward(LensModel lens, double focal_px, double theta);

/// Inverse lens map r -> theta. Empty when r is outside the lens domain
/// (r > f for orthographic, r > 2f for equisolid).
std::optional<double> lens_inverse(LensModel lens, double focal_px, double r);

/// d(r)/d(theta) for the given model.
double lens_derivative(LensModel lens, double focal_px, double theta);

/// Unit ray in the (unpitched) camera frame for pixel (u, v).
/// Throws InvalidPixelError when the pixel is outside the crop or outside the
/// lens domain.
Eigen::Vector3d pixel_to_ray(const CameraModel& cam, double u, double v);

/// Non-throwing variant; does not check the crop bounds.
std::optional<Eigen::Vector3d> try_pixel_to_ray(const CameraModel& cam, double u, double v);

/// Rotation about the y axis by the mounting pitch.
Eigen::Vector3d pitch_rotate(const Eigen::Vector3d& d, double pitch_deg);

/// Intersects a pitched ray from (0, 0, height_m) with z = 0. Rays with
/// d'_z >= 0 never reach the ground and yield an empty result.
std::optional<Eigen::Vector2d> ray_to_ground(double height_m, const Eigen::Vector3d& pitched);

/// pixel_to_ray -> pitch_rotate -> ray_to_ground without crop checks.
std::optional<Eigen::Vector2d> pixel_to_ground(const CameraModel& cam, double u, double v);

/// Projects a camera-centred world point (x forward, y right, z up) into the
/// image. Empty outside the field of view or at the camera position.
std::optional<Eigen::Vector2d> ground_to_pixel(const CameraModel& cam, const Eigen::Vector3d& p);

/// Incidence angle (radians) of a camera-centred world point.
double incidence_angle(const CameraModel& cam, const Eigen::Vector3d& p);

}  // namespace crosswarn::geometry
