#include "projection.hpp"

#include <cmath>

namespace crosswarn::calibration::detail {

namespace {

// r = f * lens_shape(theta), unbounded versions of the lens maps.
double lens_shape(LensModel lens, double theta) {
  switch (lens) {
    case LensModel::kEquidistant: return theta;
    case LensModel::kEquisolid: return 2.0 * std::sin(theta / 2.0);
    case LensModel::kOrthographic: return std::sin(theta);
    case LensModel::kStereographic: return 2.0 * std::tan(theta / 2.0);
  }
  return theta;
}

double lens_shape_derivative(LensModel lens, double theta) {
  switch (lens) {
    case LensModel::kEquidistant: return 1.0;
    case LensModel::kEquisolid: return std::cos(theta / 2.0);
    case LensModel::kOrthographic: return std::cos(theta);
    case LensModel::kStereographic: {
      const double c = std::cos(theta / 2.0);
      return 1.0 / (c * c);
    }
  }
  return 1.0;
}

}  // namespace

Projection project(LensModel lens, const Intrinsics& k, const Eigen::Vector3d& p) {
  const double x = p.x();
  const double y = p.y();
  const double z = p.z();
  const double f = k.focal_px;
  const double rho = std::hypot(y, z);
  const double n2 = x * x + rho * rho;

  // s = r / rho, so that u = cx + s*y and v = cy - s*z
  double s = 0.0;
  double h_over_rho = 0.0;
  Eigen::RowVector3d ds = Eigen::RowVector3d::Zero();
  if (rho > 1e-12 * std::max(1.0, std::abs(x))) {
    const double theta = std::atan2(rho, x);
    const double h = lens_shape(lens, theta);
    const double hp = lens_shape_derivative(lens, theta);
    h_over_rho = h / rho;
    s = f * h_over_rho;
    const double ds_dx = -f * hp / n2;
    const double ds_drho = f * hp * x / (n2 * rho) - f * h / (rho * rho);
    ds << ds_dx, ds_drho * y / rho, ds_drho * z / rho;
  } else {
    // on the optical axis every lens behaves like r = f * theta
    h_over_rho = 1.0 / x;
    s = f / x;
    ds << -f / (x * x), 0.0, 0.0;
  }

  Projection out;
  out.uv = {k.cx + s * y, k.cy - s * z};
  out.d_point.row(0) = y * ds + Eigen::RowVector3d(0.0, s, 0.0);
  out.d_point.row(1) = -z * ds - Eigen::RowVector3d(0.0, 0.0, s);
  out.d_intrinsics << 1.0, 0.0, h_over_rho * y,
                      0.0, 1.0, -h_over_rho * z;
  return out;
}

}  // namespace crosswarn::calibration::detail
