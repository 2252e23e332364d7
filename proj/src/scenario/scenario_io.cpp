#include <fstream>

#include <nlohmann/json.hpp>

#include "crosswarn/scenario/scenario.hpp"

namespace crosswarn::scenario {

using nlohmann::json;

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.id = j.at("id").get<std::string>();
    s.name = j.value("name", s.id);
    s.category = category_from_string(j.at("category").get<std::string>());
    s.duration_s = j.at("duration_s").get<double>();
    s.fps = j.value("fps", 30.0);
    for (const auto& ja : j.at("agents")) {
      Agent a;
      a.id = ja.at("id").get<std::string>();
      a.cls = agent_class_from_string(ja.at("class").get<std::string>());
      a.dims = default_dims(a.cls);
      if (ja.contains("dims")) {
        const auto& d = ja.at("dims");
        a.dims = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
      }
      a.interpolation = ja.value("interpolation", std::string("linear")) == "cubic"
                            ? Interpolation::kCubic
                            : Interpolation::kLinear;
      for (const auto& w : ja.at("waypoints")) {
        a.waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()});
      }
      if (ja.contains("occluded")) {
        for (const auto& w : ja.at("occluded")) {
          a.occluded.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
        }
      }
      s.agents.push_back(std::move(a));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json agents = json::array();
  for (const auto& a : s.agents) {
    json w = json::array();
    for (const auto& p : a.waypoints) w.push_back({p.t, p.x, p.y});
    json ja{{"id", a.id},
            {"class", to_string(a.cls)},
            {"dims", {a.dims.length, a.dims.width, a.dims.height}},
            {"interpolation", to_string(a.interpolation)},
            {"waypoints", w}};
    if (!a.occluded.empty()) {
      json occ = json::array();
      for (const auto& [t0, t1] : a.occluded) occ.push_back({t0, t1});
      ja["occluded"] = occ;
    }
    agents.push_back(ja);
  }
  return {{"id", s.id},         {"name", s.name}, {"category", to_string(s.category)},
          {"duration_s", s.duration_s}, {"fps", s.fps}, {"agents", agents}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

Suite load_suite(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ScenarioError("cannot open suite manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(manifest_path.string() + ": " + e.what());
  }
  Suite suite;
  for (const auto& e : j.at("scenarios")) {
    SuiteEntry entry{e.at("id").get<std::string>(), e.at("file").get<std::string>(),
                     category_from_string(e.at("category").get<std::string>())};
    Scenario s = load_scenario(dir / entry.file);
    if (s.id != entry.id || s.category != entry.category) {
      throw ScenarioError("manifest entry '" + entry.id + "' disagrees with " + entry.file);
    }
    suite.manifest.push_back(std::move(entry));
    suite.scenarios.push_back(std::move(s));
  }
  return suite;
}

}  // namespace crosswarn::scenario
