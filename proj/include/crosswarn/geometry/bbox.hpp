#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Core>

#include "crosswarn/geometry/camera_model.hpp"

namespace crosswarn::geometry {

class NotVisibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Object dimensions in metres.
struct BoxDims {
  double length = 0.5;
  double width = 0.5;
  double height = 1.7;
};

inline constexpr BoxDims kPedestrianDims{0.5, 0.5, 1.7};
inline constexpr BoxDims kCyclistDims{1.8, 0.6, 1.8};
inline constexpr BoxDims kCarDims{4.5, 1.8, 1.5};

/// Ground-standing 3D box. Length runs along the heading direction.
struct Box3D {
  Eigen::Vector2d center_ground = Eigen::Vector2d::Zero();
  BoxDims dims;
  double heading = 0.0;  // radians, 0 = camera forward axis

  std::array<Eigen::Vector3d, 8> corners() const;
};

/// Axis-aligned image rectangle of the visible projected corners.
struct ImageRect {
  double u_min = 0.0;
  double u_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  int visible_corners = 0;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  /// Bottom centre in image coordinates (v grows downward).
  Eigen::Vector2d bottom_center() const { return {(u_min + u_max) / 2.0, v_max}; }
};

/// Throws NotVisibleError when no corner falls inside the field of view.
ImageRect project_box_to_bbox(const CameraModel& cam, const Box3D& box);

/// Distance between the ground point under the bbox bottom centre and the
/// true box centre. Uses the continuous inverse projection.
double bbox_localization_error(const CameraModel& cam, const Box3D& box);

}  // namespace crosswarn::geometry
