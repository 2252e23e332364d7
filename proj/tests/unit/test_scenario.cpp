#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "crosswarn/scenario/scenario.hpp"

using namespace crosswarn::scenario;
using doctest::Approx;

namespace {

const Suite& shipped() {
  static const Suite suite = load_suite(std::filesystem::path(CROSSWARN_DATA_DIR) / "scenarios");
  return suite;
}

Agent make_agent(std::string id, AgentClass cls, std::vector<Waypoint> wps,
                 Interpolation interp = Interpolation::kLinear) {
  Agent a;
  a.id = std::move(id);
  a.cls = cls;
  a.dims = default_dims(cls);
  a.waypoints = std::move(wps);
  a.interpolation = interp;
  return a;
}

Scenario make_scenario(double duration, std::vector<Agent> agents) {
  Scenario s;
  s.id = "toy";
  s.name = "toy";
  s.duration_s = duration;
  s.agents = std::move(agents);
  s.validate();
  return s;
}

// Brute-force labeler: for every frame and pair, scan forward for the
// closest approach instead of using a suffix minimum.
std::vector<FrameLabel> brute_labels(const Scenario& s, const GroundTruthParams& gt) {
  const int n = s.frame_count();
  std::vector<std::map<std::string, AgentState>> at(n);
  for (int f = 0; f < n; ++f) {
    for (auto& a : positions_at(s, f)) at[f][a.id] = a;
  }
  std::vector<FrameLabel> out(n);
  for (const auto& c : s.agents) {
    if (!is_cyclist(c.cls)) continue;
    const double a_dec = c.cls == AgentClass::kEbike ? gt.ebike_decel_mps2 : gt.decel_mps2;
    for (const auto& p : s.agents) {
      if (!is_pedestrian(p.cls)) continue;
      auto gap = [&](int f) {
        return (at[f].at(c.id).position - at[f].at(p.id).position).norm();
      };
      auto joint = [&](int f) { return at[f].count(c.id) && at[f].count(p.id); };
      for (int f = 0; f + 1 < n; ++f) {
        if (!joint(f) || !joint(f + 1)) continue;
        const double v = at[f].at(c.id).velocity.norm();
        if (v <= 0 || gap(f + 1) >= gap(f)) continue;
        double best = gap(f);
        int best_at = f;
        for (int g = f + 1; g < n && joint(g); ++g) {
          if (gap(g) < best) {
            best = gap(g);
            best_at = g;
          }
        }
        if (best > gt.cpa_radius_m) continue;
        const double ttc = (best_at - f) / s.fps;
        const double d_stop = v * gt.t_react_s + v * v / (2 * a_dec);
        if (!(d_stop > gt.stop_margin * gap(f) || ttc < gt.ttc_threshold_s)) continue;
        const double sev = std::min(v * v / (gt.v_max_mps * gt.v_max_mps), 1.0);
        auto& l = out[f];
        const std::pair<std::string, std::string> pair{c.id, p.id};
        const bool worse = !l.dangerous || sev > l.severity ||
                           (sev == l.severity && (ttc < l.ttc_s || (ttc == l.ttc_s && pair < *l.pair)));
        if (!worse) continue;
        l.dangerous = true;
        l.severity = sev;
        l.ttc_s = ttc;
        l.pair = pair;
        l.tier = ttc < gt.prt_distracted_s ? Tier::kImminent : Tier::kActionable;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("stopping distance at 30 km/h") {
  CHECK(stopping_distance(8.33, 0.84, 1.96) == Approx(24.7).epsilon(0.05 / 24.7));
  CHECK(stopping_distance(8.33, 2.5, 3.4) == Approx(31.0).epsilon(0.05 / 31.0));
  CHECK(stopping_distance(0.0, 0.84, 1.96) == 0.0);
}

TEST_CASE("swerve time") {
  CHECK(swerve_time(1.0, 0.4) == Approx(1.55).epsilon(0.01 / 1.55));
  CHECK(swerve_time(1.0, 0.4) - 0.84 == Approx(std::sqrt(2.0 / (0.4 * 9.81))));
  CHECK(swerve_time(1e-12, 0.4) == Approx(0.84));
  const double m1 = swerve_time(1.0, 0.4) - 0.84;
  const double m2 = swerve_time(1.0, 0.8) - 0.84;
  CHECK(m2 == Approx(m1 / std::numbers::sqrt2));
}

TEST_CASE("positions_at interpolates waypoints") {
  const auto s = make_scenario(4.0, {make_agent("ped1", AgentClass::kPedestrian, {{0, 2, 1}, {2, 6, 1}, {4, 6, 5}})});
  SUBCASE("frame at a waypoint time") {
    const auto st = positions_at(s, 60);
    REQUIRE(st.size() == 1);
    CHECK(st[0].position.x() == Approx(6.0));
    CHECK(st[0].position.y() == Approx(1.0));
  }
  SUBCASE("linear leg has constant velocity") {
    for (int f : {1, 15, 30, 58}) {
      const auto st = positions_at(s, f);
      CHECK(st[0].velocity.x() == Approx(2.0));
      CHECK(st[0].velocity.y() == Approx(0.0).epsilon(1e-9));
    }
  }
  SUBCASE("out of range") {
    CHECK_THROWS(positions_at(s, -1));
    CHECK_THROWS(positions_at(s, s.frame_count()));
  }
}

TEST_CASE("agents are absent outside their waypoint span") {
  const auto s = make_scenario(3.0, {make_agent("ped1", AgentClass::kPedestrian, {{0, 0, 0}, {3, 3, 0}}),
                                     make_agent("cyc1", AgentClass::kCyclist, {{1, 0, 2}, {2, 5, 2}})});
  CHECK(positions_at(s, 0).size() == 1);
  CHECK(positions_at(s, 45).size() == 2);
  CHECK(positions_at(s, 75).size() == 1);
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(make_agent("a", AgentClass::kPedestrian, {{0, 0, 0}}).validate(), ScenarioError);
  CHECK_THROWS_AS(make_agent("a", AgentClass::kPedestrian, {{0, 0, 0}, {0, 1, 0}}).validate(), ScenarioError);
  CHECK_THROWS_AS(make_agent("a", AgentClass::kPedestrian, {{1, 0, 0}, {0.5, 1, 0}}).validate(), ScenarioError);
  nlohmann::json j = {{"id", "x"}, {"name", "x"}, {"category", "nope"}, {"duration_s", 1.0}, {"agents", nlohmann::json::array()}};
  CHECK_THROWS(scenario_from_json(j));
}

TEST_CASE("scenario json round trip") {
  for (const auto& s : shipped().scenarios) {
    const auto back = scenario_from_json(scenario_to_json(s));
    CHECK(scenario_to_json(back) == scenario_to_json(s));
  }
}

TEST_CASE("cubic swerve path has no speed jumps") {
  const auto* s = shipped().find("swerving_cyclist");
  REQUIRE(s);
  std::optional<double> prev;
  for (int f = 0; f < s->frame_count(); ++f) {
    for (const auto& a : positions_at(*s, f)) {
      if (a.id != "cyc1") continue;
      const double v = a.velocity.norm();
      if (prev) CHECK(std::abs(v - *prev) < 0.5);
      prev = v;
    }
  }
  REQUIRE(prev);
}

TEST_CASE("world_to_camera") {
  const Eigen::Vector2d p(3.0, -2.0);
  CHECK((world_to_camera({0, 0, 0}, p) - p).norm() < 1e-12);
  CHECK((world_to_camera({1, 1, 0}, p) - Eigen::Vector2d(2, -3)).norm() < 1e-12);
  // camera facing +y: world +y is camera forward, world +x is camera right (-y)
  CHECK((world_to_camera({0, 0, 90}, Eigen::Vector2d(0, 1)) - Eigen::Vector2d(1, 0)).norm() < 1e-12);
  CHECK((world_to_camera({0, 0, 90}, Eigen::Vector2d(1, 0)) - Eigen::Vector2d(0, -1)).norm() < 1e-12);
  const CameraPose pose{28, 0, 180};
  CHECK((camera_to_world(pose, world_to_camera(pose, p)) - p).norm() < 1e-12);
  CHECK((world_to_camera(pose, Eigen::Vector2d(20, 1)) - Eigen::Vector2d(8, -1)).norm() < 1e-12);
}

TEST_CASE("stationary cyclist is never dangerous") {
  // pedestrian walks straight into a parked bike
  const auto s = make_scenario(6.0, {make_agent("ped1", AgentClass::kPedestrian, {{0, 0, 0}, {6, 8, 0}}),
                                     make_agent("cyc1", AgentClass::kCyclist, {{0, 6, 0}, {6, 6, 0}})});
  for (const auto& l : label_frames(s, {})) CHECK_FALSE(l.dangerous);
}

TEST_CASE("severity follows speed") {
  for (auto [speed, expect] : {std::pair{6.0, 0.25}, std::pair{12.0, 1.0}, std::pair{15.0, 1.0}}) {
    const double t_end = 40.0 / speed;
    const auto s = make_scenario(t_end, {make_agent("ped1", AgentClass::kPedestrian, {{0, 30, 0}, {t_end, 30, 0.01}}),
                                         make_agent("cyc1", AgentClass::kCyclist, {{0, 0, 1}, {t_end, 40, 1}})});
    int dangerous = 0;
    for (const auto& l : label_frames(s, {})) {
      if (!l.dangerous) continue;
      ++dangerous;
      CHECK(l.severity == Approx(expect));
    }
    CHECK(dangerous > 0);
  }
}

TEST_CASE("labels match a brute-force labeler on the shipped suite") {
  const GroundTruthParams gt;
  for (const auto& s : shipped().scenarios) {
    CAPTURE(s.id);
    const auto got = label_frames(s, gt);
    const auto want = brute_labels(s, gt);
    REQUIRE(got.size() == want.size());
    for (std::size_t f = 0; f < got.size(); ++f) {
      CAPTURE(f);
      CHECK(got[f].dangerous == want[f].dangerous);
      CHECK(got[f].tier == want[f].tier);
      if (want[f].dangerous) {
        CHECK(got[f].severity == Approx(want[f].severity));
        CHECK(got[f].ttc_s == Approx(want[f].ttc_s));
        CHECK(got[f].pair == want[f].pair);
      } else {
        CHECK(got[f].severity == 0.0);
      }
    }
  }
}

TEST_CASE("label invariants") {
  const GroundTruthParams gt;
  for (const auto& s : shipped().scenarios) {
    for (const auto& l : label_frames(s, gt)) {
      CHECK((l.tier != Tier::kNone) == l.dangerous);
      if (l.dangerous) {
        CHECK((l.tier == Tier::kImminent) == (l.ttc_s < gt.prt_distracted_s));
        CHECK(l.severity >= 0.0);
        CHECK(l.severity <= 1.0);
        CHECK(l.cpa_m <= gt.cpa_radius_m);
      }
    }
  }
}

TEST_CASE("shipped suite composition") {
  const auto& suite = shipped();
  REQUIRE(suite.scenarios.size() == 24);
  std::map<Category, int> counts;
  for (const auto& s : suite.scenarios) ++counts[s.category];
  CHECK(counts[Category::kSafe] == 3);
  CHECK(counts[Category::kStandard] == 6);
  CHECK(counts[Category::kHighSpeed] == 3);
  CHECK(counts[Category::kAccessibility] == 2);
  CHECK(counts[Category::kMultiAgent] == 3);
  CHECK(counts[Category::kEdgeCase] == 3);
  CHECK(counts[Category::kNonlinear] == 4);

  const GroundTruthParams gt;
  int with_danger = 0, with_actionable = 0;
  for (const auto& s : suite.scenarios) {
    CAPTURE(s.id);
    const auto labels = label_frames(s, gt);
    const bool danger = std::any_of(labels.begin(), labels.end(), [](const auto& l) { return l.dangerous; });
    const bool actionable =
        std::any_of(labels.begin(), labels.end(), [](const auto& l) { return l.tier == Tier::kActionable; });
    with_danger += danger;
    with_actionable += actionable;
    if (s.category == Category::kSafe) CHECK_FALSE(danger);
    if (s.id == "fast_approach" || s.id == "occluded_emergence") {
      CHECK(danger);
      CHECK_FALSE(actionable);
    }
  }
  CHECK(with_danger == 21);
  CHECK(with_actionable == 19);
}

TEST_CASE("labels are independent of agent order") {
  for (const auto& s : shipped().scenarios) {
    Scenario r = s;
    std::reverse(r.agents.begin(), r.agents.end());
    const auto a = label_frames(s, {});
    const auto b = label_frames(r, {});
    for (std::size_t f = 0; f < a.size(); ++f) {
      CHECK(a[f].tier == b[f].tier);
      CHECK(a[f].pair == b[f].pair);
    }
  }
}
