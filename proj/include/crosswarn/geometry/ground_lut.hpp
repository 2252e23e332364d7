#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "crosswarn/geometry/camera_model.hpp"

namespace crosswarn::geometry {

/// Per-pixel metric ground coordinates (camera-centred, x forward, y right)
/// with a validity mask. Built once; read-only afterwards.
class GroundLut {
 public:
  static GroundLut build(const CameraModel& cam);

  int width() const { return width_; }
  int height() const { return height_; }

  bool valid(int u, int v) const;

  /// Single-index lookup. Empty for invalid or out-of-crop pixels.
  std::optional<Eigen::Vector2d> at(int u, int v) const;

  /// Bilinear lookup at a sub-pixel location; empty when any of the four
  /// neighbours is invalid.
  std::optional<Eigen::Vector2d> sample(double u, double v) const;

  std::size_t valid_count() const;

  /// Raw storage, row-major, two doubles per pixel.
  const std::vector<double>& raw_ground() const { return ground_; }
  const std::vector<std::uint8_t>& raw_mask() const { return mask_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> ground_;
  std::vector<std::uint8_t> mask_;
};

/// Ground value the LUT holds for integer pixel (u, v), computed on demand.
/// Bit-identical to GroundLut::build for the same camera.
std::optional<Eigen::Vector2d> ground_at_pixel(const CameraModel& cam, int u, int v);

}  // namespace crosswarn::geometry
