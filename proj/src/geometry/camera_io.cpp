#include "crosswarn/geometry/camera_io.hpp"

#include <fstream>

namespace crosswarn::geometry {

void apply_calibration_json(const nlohmann::json& j, CameraModel& cam) {
  try {
    cam.focal_px = j.at("focal_px").get<double>();
    cam.fov_deg = j.at("fov_deg").get<double>();
    const auto& c = j.at("optical_center");
    cam.optical_center = {c.at(0).get<double>(), c.at(1).get<double>()};
    const auto& crop = j.at("crop_size");
    cam.width = crop.at(0).get<int>();
    cam.height = crop.at(1).get<int>();
    cam.lens = lens_from_string(j.value("projection", std::string("equidistant")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidCameraError(std::string("malformed calibration: ") + e.what());
  }
  cam.validate();
}

nlohmann::json calibration_json(const CameraModel& cam) {
  return {{"focal_px", cam.focal_px},
          {"fov_deg", cam.fov_deg},
          {"optical_center", {cam.optical_center.x(), cam.optical_center.y()}},
          {"crop_size", {cam.width, cam.height}},
          {"projection", std::string(to_string(cam.lens))}};
}

CameraModel load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidCameraError("cannot open calibration file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidCameraError("calibration file is not valid JSON: " + path.string());
  }
  CameraModel cam;
  apply_calibration_json(j, cam);
  return cam;
}

void save_calibration(const std::filesystem::path& path, const CameraModel& cam) {
  std::ofstream out(path);
  out << calibration_json(cam).dump(2) << '\n';
}

}  // namespace crosswarn::geometry
