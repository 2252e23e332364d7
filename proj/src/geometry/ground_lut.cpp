#include "crosswarn/geometry/ground_lut.hpp"

#include <algorithm>
#include <cmath>

namespace crosswarn::geometry {

std::optional<Eigen::Vector2d> ground_at_pixel(const CameraModel& cam, int u, int v) {
  if (u < 0 || v < 0 || u >= cam.width || v >= cam.height) return std::nullopt;
  return pixel_to_ground(cam, static_cast<double>(u), static_cast<double>(v));
}

GroundLut GroundLut::build(const CameraModel& cam) {
  cam.validate();
  GroundLut lut;
  lut.width_ = cam.width;
  lut.height_ = cam.height;
  const std::size_t n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  lut.ground_.assign(2 * n, 0.0);
  lut.mask_.assign(n, 0);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const std::size_t idx = static_cast<std::size_t>(v) * cam.width + u;
      if (auto g = ground_at_pixel(cam, u, v)) {
        lut.ground_[2 * idx] = g->x();
        lut.ground_[2 * idx + 1] = g->y();
        lut.mask_[idx] = 1;
      }
    }
  }
  return lut;
}

bool GroundLut::valid(int u, int v) const {
  if (u < 0 || v < 0 || u >= width_ || v >= height_) return false;
  return mask_[static_cast<std::size_t>(v) * width_ + u] != 0;
}

std::optional<Eigen::Vector2d> GroundLut::at(int u, int v) const {
  if (!valid(u, v)) return std::nullopt;
  const std::size_t idx = static_cast<std::size_t>(v) * width_ + u;
  return Eigen::Vector2d(ground_[2 * idx], ground_[2 * idx + 1]);
}

std::optional<Eigen::Vector2d> GroundLut::sample(double u, double v) const {
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const auto g00 = at(u0, v0);
  const auto g10 = at(u0 + 1, v0);
  const auto g01 = at(u0, v0 + 1);
  const auto g11 = at(u0 + 1, v0 + 1);
  if (!g00 || !g10 || !g01 || !g11) return std::nullopt;
  const double a = u - u0;
  const double b = v - v0;
  return (1 - a) * (1 - b) * *g00 + a * (1 - b) * *g10 + (1 - a) * b * *g01 + a * b * *g11;
}

std::size_t GroundLut::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

}  // namespace crosswarn::geometry
