#pragma once

#include <Eigen/Core>

#include "crosswarn/calibration/calibration.hpp"

namespace crosswarn::calibration::detail {

struct Projection {
  Eigen::Vector2d uv;
  Eigen::Matrix<double, 2, 3> d_point;       // d(u,v)/d(x,y,z)
  Eigen::Matrix<double, 2, 3> d_intrinsics;  // d(u,v)/d(cx,cy,f)
};

Projection project(LensModel lens, const Intrinsics& k, const Eigen::Vector3d& p);

}  // namespace crosswarn::calibration::detail
