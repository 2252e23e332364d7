#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "crosswarn/geometry/camera_model.hpp"

namespace crosswarn::geometry {

/// Calibration file:
///   { "focal_px", "fov_deg", "optical_center": [cx, cy],
///     "crop_size": [W, H], "projection": "equidistant" }
/// Mounting (height, pitch) is not part of the file and is left untouched.
void apply_calibration_json(const nlohmann::json& j, CameraModel& cam);
nlohmann::json calibration_json(const CameraModel& cam);

CameraModel load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CameraModel& cam);

}  // namespace crosswarn::geometry
