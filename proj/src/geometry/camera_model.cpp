#include "crosswarn/geometry/camera_model.hpp"

#include <cmath>
#include <numbers>

namespace crosswarn::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double deg) { return deg * kPi / 180.0; }

// Ray in the unpitched camera frame for a pixel offset (dx, dy) at angle theta.
Eigen::Vector3d ray_from_polar(double theta, double dx, double dy, double r) {
  if (r == 0.0) return {1.0, 0.0, 0.0};
  const double cos_phi = dx / r;
  const double sin_phi = dy / r;
  const double s = std::sin(theta);
  return {std::cos(theta), s * cos_phi, -s * sin_phi};
}

}  // namespace

std::string_view to_string(LensModel lens) {
  switch (lens) {
    case LensModel::kEquidistant: return "equidistant";
    case LensModel::kEquisolid: return "equisolid";
    case LensModel::kOrthographic: return "orthographic";
    case LensModel::kStereographic: return "stereographic";
  }
  return "unknown";
}

LensModel lens_from_string(std::string_view name) {
  for (LensModel lens : kAllLensModels) {
    if (to_string(lens) == name) return lens;
  }
  throw InvalidCameraError("unknown projection model: " + std::string(name));
}

void CameraModel::validate() const {
  if (!(focal_px > 0.0)) throw InvalidCameraError("focal_px must be positive");
  if (width <= 0 || height <= 0) throw InvalidCameraError("crop size must be positive");
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw InvalidCameraError("fov_deg must lie in (0, 360]");
  if (!(optical_center.x() >= 0.0 && optical_center.x() < width && optical_center.y() >= 0.0 &&
        optical_center.y() < height)) {
    throw InvalidCameraError("optical center lies outside the crop");
  }
  if (!(height_m > 0.0)) throw InvalidCameraError("height_m must be positive");
}

double CameraModel::half_fov_rad() const { return deg2rad(fov_deg) / 2.0; }

double focal_from_fov(double diameter_px, double fov_deg) {
  return diameter_px * 180.0 / (fov_deg * kPi);
}

std::optional<double> lens_forward(LensModel lens, double f, double theta) {
  if (theta < 0.0) return std::nullopt;
  switch (lens) {
    case LensModel::kEquidistant:
      return f * theta;
    case LensModel::kEquisolid:
      if (theta > kPi) return std::nullopt;
      return 2.0 * f * std::sin(theta / 2.0);
    case LensModel::kOrthographic:
      if (theta > kPi / 2.0) return std::nullopt;
      return f * std::sin(theta);
    case LensModel::kStereographic:
      if (theta >= kPi) return std::nullopt;
      return 2.0 * f * std::tan(theta / 2.0);
  }
  return std::nullopt;
}

std::optional<double> lens_inverse(LensModel lens, double f, double r) {
  if (r < 0.0) return std::nullopt;
  switch (lens) {
    case LensModel::kEquidistant:
      return r / f;
    case LensModel::kEquisolid:
      if (r > 2.0 * f) return std::nullopt;
      return 2.0 * std::asin(r / (2.0 * f));
    case LensModel::kOrthographic:
      if (r > f) return std::nullopt;
      return std::asin(r / f);
    case LensModel::kStereographic:
      return 2.0 * std::atan(r / (2.0 * f));
  }
  return std::nullopt;
}

double lens_derivative(LensModel lens, double f, double theta) {
  switch (lens) {
    case LensModel::kEquidistant: return f;
    case LensModel::kEquisolid: return f * std::cos(theta / 2.0);
    case LensModel::kOrthographic: return f * std::cos(theta);
    case LensModel::kStereographic: {
      const double c = std::cos(theta / 2.0);
      return f / (c * c);
    }
  }
  return f;
}

std::optional<Eigen::Vector3d> try_pixel_to_ray(const CameraModel& cam, double u, double v) {
  const double dx = u - cam.optical_center.x();
  const double dy = v - cam.optical_center.y();
  const double r = std::hypot(dx, dy);
  const auto theta = lens_inverse(cam.lens, cam.focal_px, r);
  if (!theta) return std::nullopt;
  return ray_from_polar(*theta, dx, dy, r);
}

Eigen::Vector3d pixel_to_ray(const CameraModel& cam, double u, double v) {
  if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) {
    throw InvalidPixelError("pixel outside the crop");
  }
  auto ray = try_pixel_to_ray(cam, u, v);
  if (!ray) throw InvalidPixelError("pixel radius outside the lens domain");
  return *ray;
}

Eigen::Vector3d pitch_rotate(const Eigen::Vector3d& d, double pitch_deg) {
  const double a = deg2rad(pitch_deg);
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * d.x() - s * d.z(), d.y(), s * d.x() + c * d.z()};
}

std::optional<Eigen::Vector2d> ray_to_ground(double height_m, const Eigen::Vector3d& pitched) {
  if (!(pitched.z() < 0.0)) return std::nullopt;
  const double t = -height_m / pitched.z();
  return Eigen::Vector2d(t * pitched.x(), t * pitched.y());
}

std::optional<Eigen::Vector2d> pixel_to_ground(const CameraModel& cam, double u, double v) {
  const auto ray = try_pixel_to_ray(cam, u, v);
  if (!ray) return std::nullopt;
  return ray_to_ground(cam.height_m, pitch_rotate(*ray, cam.pitch_deg));
}

namespace {

// Inverse pitch rotation of the camera-relative direction to a world point.
Eigen::Vector3d camera_direction(const CameraModel& cam, const Eigen::Vector3d& p) {
  const Eigen::Vector3d q(p.x(), p.y(), p.z() - cam.height_m);
  return pitch_rotate(q, -cam.pitch_deg);
}

}  // namespace

double incidence_angle(const CameraModel& cam, const Eigen::Vector3d& p) {
  const Eigen::Vector3d d = camera_direction(cam, p);
  return std::atan2(std::hypot(d.y(), d.z()), d.x());
}

std::optional<Eigen::Vector2d> ground_to_pixel(const CameraModel& cam, const Eigen::Vector3d& p) {
  const Eigen::Vector3d d = camera_direction(cam, p);
  const double rho = std::hypot(d.y(), d.z());
  if (rho == 0.0 && d.x() <= 0.0) return std::nullopt;  // camera position or straight back
  const double theta = std::atan2(rho, d.x());
  if (theta > cam.half_fov_rad()) return std::nullopt;
  const auto r = lens_forward(cam.lens, cam.focal_px, theta);
  if (!r) return std::nullopt;
  if (rho == 0.0) return cam.optical_center;
  // cos(phi) = d_y / rho, sin(phi) = -d_z / rho
  return Eigen::Vector2d(cam.optical_center.x() + *r * d.y() / rho,
                         cam.optical_center.y() - *r * d.z() / rho);
}

}  // namespace crosswarn::geometry
