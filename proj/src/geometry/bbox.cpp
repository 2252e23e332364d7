#include "crosswarn/geometry/bbox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crosswarn::geometry {

std::array<Eigen::Vector3d, 8> Box3D::corners() const {
  const Eigen::Vector2d along(std::cos(heading), std::sin(heading));
  const Eigen::Vector2d across(-along.y(), along.x());
  const double hl = dims.length / 2.0;
  const double hw = dims.width / 2.0;
  std::array<Eigen::Vector3d, 8> out;
  int i = 0;
  for (double z : {0.0, dims.height}) {
    for (double sl : {-1.0, 1.0}) {
      for (double sw : {-1.0, 1.0}) {
        const Eigen::Vector2d g = center_ground + sl * hl * along + sw * hw * across;
        out[i++] = Eigen::Vector3d(g.x(), g.y(), z);
      }
    }
  }
  return out;
}

ImageRect project_box_to_bbox(const CameraModel& cam, const Box3D& box) {
  ImageRect rect;
  rect.u_min = rect.v_min = std::numeric_limits<double>::infinity();
  rect.u_max = rect.v_max = -std::numeric_limits<double>::infinity();
  for (const auto& corner : box.corners()) {
    const auto px = ground_to_pixel(cam, corner);
    if (!px) continue;
    rect.u_min = std::min(rect.u_min, px->x());
    rect.u_max = std::max(rect.u_max, px->x());
    rect.v_min = std::min(rect.v_min, px->y());
    rect.v_max = std::max(rect.v_max, px->y());
    ++rect.visible_corners;
  }
  if (rect.visible_corners == 0) throw NotVisibleError("no box corner inside the field of view");
  return rect;
}

double bbox_localization_error(const CameraModel& cam, const Box3D& box) {
  const ImageRect rect = project_box_to_bbox(cam, box);
  const Eigen::Vector2d bc = rect.bottom_center();
  const auto ground = pixel_to_ground(cam, bc.x(), bc.y());
  if (!ground) throw NotVisibleError("bbox bottom centre is above the horizon");
  return (*ground - box.center_ground).norm();
}

}  // namespace crosswarn::geometry
