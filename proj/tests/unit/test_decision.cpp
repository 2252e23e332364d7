#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "crosswarn/decision/decision.hpp"
#include "crosswarn/sensor/sensor.hpp"

using namespace crosswarn::decision;
using crosswarn::scenario::AgentClass;
using crosswarn::sensor::Observation;
using doctest::Approx;

namespace {

constexpr double kFps = 30.0;

Observation obs(std::string id, AgentClass cls, double x, double y, bool detected = true) {
  Observation o;
  o.agent_id = std::move(id);
  o.cls = cls;
  o.true_xy = {x, y};
  if (detected) o.observed_xy = Eigen::Vector2d(x, y);
  o.detected = detected;
  return o;
}

// Decision track with positions p0 + v*i for i = 0..len-1 (oldest first).
DecisionTrack line(int id, DetectorClass cls, Eigen::Vector2d p0, Eigen::Vector2d v_per_frame, int len) {
  DecisionTrack t;
  t.id = id;
  t.cls = cls;
  t.velocity = v_per_frame;
  for (int i = 0; i < len; ++i) t.history.push_back(p0 + v_per_frame * i);
  return t;
}

CyclistMemory seen_at(int frame) {
  CyclistMemory m;
  m.record(frame, true);
  return m;
}

const PipelineParams kSelected{};

}  // namespace

TEST_CASE("tracker keeps one id under continuous detection") {
  Tracker tr;
  for (int f = 0; f < 100; ++f) tr.update({obs("a", AgentClass::kCyclist, 0.15 * f, 0)}, f);
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].id == 1);
}

TEST_CASE("tracker coasts through a 5-frame dropout") {
  Tracker tr;
  for (int f = 0; f < 60; ++f) {
    const bool seen = f < 30 || f >= 35;
    tr.update({obs("a", AgentClass::kCyclist, 0.15 * f, 0, seen)}, f);
  }
  REQUIRE(tr.tracks().size() == 1);
  CHECK(tr.tracks()[0].id == 1);
  CHECK(tr.tracks()[0].last_seen == 59);
}

TEST_CASE("tracker drops tracks after 10 s without a detection") {
  Tracker tr;
  tr.update({obs("a", AgentClass::kPedestrian, 5, 5)}, 0);
  for (int f = 1; f <= 300; ++f) tr.update({}, f);
  CHECK(tr.tracks().size() == 1);
  tr.update({}, 301);
  CHECK(tr.tracks().empty());
}

TEST_CASE("tracker does not match across detector classes") {
  Tracker tr;
  tr.update({obs("p", AgentClass::kPedestrian, 5, 0)}, 0);
  tr.update({obs("c", AgentClass::kCyclist, 5.1, 0)}, 1);
  CHECK(tr.tracks().size() == 2);
}

TEST_CASE("two agents 10 m apart never swap ids under 0.3 m noise") {
  for (int seed = 0; seed < 1000; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    Tracker tr;
    for (int f = 0; f < 60; ++f) {
      tr.update({obs("a", AgentClass::kPedestrian, 5 + 0.05 * f + noise(rng), noise(rng)),
                 obs("b", AgentClass::kPedestrian, 15 - 0.05 * f + noise(rng), noise(rng))},
                f);
    }
    REQUIRE(tr.tracks().size() == 2);
    for (const auto& t : tr.tracks()) {
      if (t.id == 1) CHECK(t.position().x() < 10.0);
      if (t.id == 2) CHECK(t.position().x() > 10.0);
    }
  }
}

TEST_CASE("estimate_speed over a 4-frame window") {
  TrackedObject t;
  for (int f = 0; f < 3; ++f) t.history.push_back({f, {2, 3}, true});
  CHECK_FALSE(estimate_speed(t, kFps));
  for (int f = 3; f < 10; ++f) t.history.push_back({f, {2, 3}, true});
  CHECK(*estimate_speed(t, kFps) == 0.0);

  TrackedObject m;
  for (int f = 0; f < 10; ++f) m.history.push_back({f, Eigen::Vector2d(5.0 / kFps * f, 0), true});
  CHECK(std::abs(*estimate_speed(m, kFps) - 5.0) < 1e-9);
  // available 4 frames (133 ms) after the first detection
  TrackedObject early;
  for (int f = 0; f < 5; ++f) early.history.push_back({f, Eigen::Vector2d(0.1 * f, 0), true});
  CHECK(estimate_speed(early, kFps));
  CHECK(4 / kFps == Approx(0.1333).epsilon(1e-3));
}

TEST_CASE("estimate_speed under localization error") {
  // worst case with independent 0.25 m errors at both ends of the window
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    TrackedObject t;
    for (int f = 0; f < 5; ++f) {
      const double a = angle(rng);
      t.history.push_back({f, Eigen::Vector2d(5.0 / kFps * f + 0.25 * std::cos(a), 0.25 * std::sin(a)), true});
    }
    worst = std::max(worst, std::abs(*estimate_speed(t, kFps) - 5.0));
  }
  CHECK(worst <= 2 * 0.25 / (4 / kFps) + 1e-9);

  // RMS with the fisheye error itself, cyclists at 5 m/s on random straight paths
  crosswarn::sensor::SensorCamera cam{{}, {}, nullptr};
  std::uniform_real_distribution<double> range(5.0, 25.0), bearing(-1.2, 1.2);
  double sq = 0.0;
  int n = 0;
  for (int i = 0; i < 2000; ++i) {
    const double r = range(rng), b = bearing(rng), h = angle(rng);
    const Eigen::Vector2d start(r * std::cos(b), r * std::sin(b)), dir(std::cos(h), std::sin(h));
    TrackedObject t;
    bool visible = true;
    for (int f = 0; f < 5 && visible; ++f) {
      crosswarn::scenario::AgentState a;
      a.id = "c";
      a.cls = AgentClass::kCyclist;
      a.dims = crosswarn::scenario::default_dims(a.cls);
      a.position = start + dir * (5.0 / kFps * f);
      a.velocity = dir * 5.0;
      const auto v = crosswarn::sensor::view_agent(cam, a, true, 1280);
      visible = v.in_view;
      t.history.push_back({f, v.observed_xy, true});
    }
    if (!visible) continue;
    const double err = *estimate_speed(t, kFps) - 5.0;
    sq += err * err;
    ++n;
  }
  REQUIRE(n > 1000);
  CHECK(std::sqrt(sq / n) < 1.5);
}

TEST_CASE("predict") {
  Tracker tr;
  const Eigen::Vector2d v(0.2, -0.1);
  for (int f = 0; f < 80; ++f) tr.update({obs("a", AgentClass::kCyclist, 3 + v.x() * f, 4 + v.y() * f)}, f);
  const auto& t = tr.tracks()[0];
  for (int order : {0, 1, 2}) CHECK((predict(t, 0, order) - t.position()).norm() == 0.0);
  for (int n : {1, 6, 15}) {
    const Eigen::Vector2d truth(3 + v.x() * (79 + n), 4 + v.y() * (79 + n));
    CHECK((predict(t, n, 1) - truth).norm() < 1e-9);
    CHECK((predict(t, n, 0) - t.position()).norm() == 0.0);
  }
}

TEST_CASE("order 2 overshoots order 1 when a circular arc ends") {
  // 5 m/s around a 6 m radius quarter turn, then straight on
  const double r = 6.0, speed = 5.0 / kFps, w = speed / r;
  const int turn = static_cast<int>(std::numbers::pi / 2 / w);
  auto at = [&](int f) -> Eigen::Vector2d {
    if (f <= turn) return {r * std::sin(w * f), r - r * std::cos(w * f)};
    const Eigen::Vector2d end(r * std::sin(w * turn), r - r * std::cos(w * turn));
    const Eigen::Vector2d dir(std::cos(w * turn), std::sin(w * turn));
    return end + dir * speed * (f - turn);
  };
  Tracker tr;
  for (int f = 0; f <= turn; ++f) {
    const auto p = at(f);
    tr.update({obs("a", AgentClass::kCyclist, p.x(), p.y())}, f);
  }
  const auto& t = tr.tracks()[0];
  int overshoot_from = -1;
  for (int n = 1; n <= 15 && overshoot_from < 0; ++n) {
    const double e1 = (predict(t, n, 1) - at(turn + n)).norm();
    const double e2 = (predict(t, n, 2) - at(turn + n)).norm();
    if (e2 > e1) overshoot_from = n;
  }
  CHECK(overshoot_from > 0);
  // and the error gap keeps growing with the delay
  const double g6 = (predict(t, 6, 2) - at(turn + 6)).norm() - (predict(t, 6, 1) - at(turn + 6)).norm();
  const double g15 = (predict(t, 15, 2) - at(turn + 15)).norm() - (predict(t, 15, 1) - at(turn + 15)).norm();
  CHECK(g15 > g6);
}

TEST_CASE("decide follows the three stages") {
  const auto ped = line(1, DetectorClass::kPerson, {20, 0}, {0, 0}, 5);
  const auto cyc = line(2, DetectorClass::kBike, {30.333, 0}, {-5.0 / kFps, 0}, 3);

  SUBCASE("no pedestrian is IDLE") {
    CHECK(decide({cyc}, seen_at(10), 10, kSelected).state == State::kIdle);
    CHECK(decide({}, CyclistMemory{}, 10, kSelected).state == State::kIdle);
  }
  SUBCASE("no cyclist in memory is SAFE") {
    CHECK(decide({ped}, CyclistMemory{}, 10, kSelected).state == State::kSafe);
    CHECK(decide({ped}, seen_at(10 - kSelected.n_memory), 10, kSelected).state == State::kSafe);
    CHECK(decide({ped}, seen_at(10 - kSelected.n_memory + 1), 10, kSelected).state == State::kWarning);
  }
  SUBCASE("head-on at 5 m/s with a 10 m gap is ALERT") {
    const auto d = decide({ped, cyc}, seen_at(10), 10, kSelected);
    CHECK(d.state == State::kAlert);
    REQUIRE(d.pair);
    CHECK(d.pair->first == 2);
    CHECK(d.pair->second == 1);
  }
  SUBCASE("short histories do not alert") {
    const auto short_cyc = line(2, DetectorClass::kBike, {30.167, 0}, {-5.0 / kFps, 0}, 2);
    CHECK(decide({ped, short_cyc}, seen_at(10), 10, kSelected).state == State::kWarning);
  }
  SUBCASE("outside the distance window is WARNING") {
    const auto far = line(2, DetectorClass::kBike, {45.333, 0}, {-5.0 / kFps, 0}, 3);
    CHECK(decide({ped, far}, seen_at(10), 10, kSelected).state == State::kWarning);
    const auto close = line(2, DetectorClass::kBike, {21.8, 0}, {-5.0 / kFps, 0}, 3);
    CHECK(decide({ped, close}, seen_at(10), 10, kSelected).state == State::kWarning);
  }
}

TEST_CASE("co-directional pair: naive closing alerts, pairwise does not") {
  SUBCASE("2 m/s, 5 m gap, k = 2") {
    PipelineParams p = kSelected;
    p.delta_min = 0.1;  // 2 m/s covers 0.133 m in two frames
    const Eigen::Vector2d v(2.0 / kFps, 0);
    const auto ped = line(1, DetectorClass::kPerson, {10, 0}, v, 3);
    const auto cyc = line(2, DetectorClass::kBike, {5, 0}, v, 3);
    const double d_past = (cyc.history[0] - ped.history[2]).norm();
    CHECK(d_past == Approx(5.133).epsilon(1e-3));
    CHECK(decide({ped, cyc}, seen_at(5), 5, p).state == State::kWarning);
    CHECK(baseline_decide(Rule::kNaiveClosing, {ped, cyc}, seen_at(5), 5, p, kFps).state == State::kAlert);
  }
  SUBCASE("property over gaps, speeds and headings") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> gap(kSelected.d_min, kSelected.d_max);
    std::uniform_real_distribution<double> speed(0.08, 0.5);  // m per frame, above delta_min / k
    std::uniform_real_distribution<double> heading(0, 2 * std::numbers::pi);
    std::uniform_real_distribution<double> coord(-50, 50);
    for (int i = 0; i < 2000; ++i) {
      const double h = heading(rng);
      const Eigen::Vector2d dir(std::cos(h), std::sin(h));
      const Eigen::Vector2d v = dir * speed(rng);
      const Eigen::Vector2d p0(coord(rng), coord(rng));
      const int len = kSelected.k_lookback + 1 + static_cast<int>(i % 5);
      const auto ped = line(1, DetectorClass::kPerson, p0 + dir * gap(rng), v, len);
      const auto cyc = line(2, DetectorClass::kBike, p0, v, len);
      CHECK(decide({ped, cyc}, seen_at(0), 0, kSelected).state == State::kWarning);
      CHECK(baseline_decide(Rule::kNaiveClosing, {ped, cyc}, seen_at(0), 0, kSelected, kFps).state ==
            State::kAlert);
    }
  }
}

TEST_CASE("baselines") {
  SUBCASE("stationary pair at 9 m: only distance_only alerts") {
    const auto ped = line(1, DetectorClass::kPerson, {10, 0}, {0, 0}, 5);
    const auto cyc = line(2, DetectorClass::kBike, {19, 0}, {0, 0}, 5);
    const auto m = seen_at(3);
    CHECK(baseline_decide(Rule::kDistanceOnly, {ped, cyc}, m, 3, kSelected, kFps).state == State::kAlert);
    CHECK(baseline_decide(Rule::kNaiveClosing, {ped, cyc}, m, 3, kSelected, kFps).state == State::kWarning);
    CHECK(baseline_decide(Rule::kTtc, {ped, cyc}, m, 3, kSelected, kFps).state == State::kWarning);
    CHECK(decide({ped, cyc}, m, 3, kSelected).state == State::kWarning);
  }
  SUBCASE("head-on at 6 m/s with a 12 m gap gives TTC 2 s") {
    const auto ped = line(1, DetectorClass::kPerson, {10, 0}, {0, 0}, 5);
    const auto cyc = line(2, DetectorClass::kBike, {22.8, 0}, {-6.0 / kFps, 0}, 5);
    CHECK((cyc.history.back() - ped.history.back()).norm() == Approx(12.0));
    CHECK(baseline_decide(Rule::kTtc, {ped, cyc}, seen_at(3), 3, kSelected, kFps).state == State::kAlert);
    const auto slow = line(2, DetectorClass::kBike, {22.4, 0}, {-3.0 / kFps, 0}, 5);
    CHECK(baseline_decide(Rule::kTtc, {ped, slow}, seen_at(3), 3, kSelected, kFps).state == State::kWarning);
  }
  SUBCASE("baselines share the presence and memory stages") {
    const auto ped = line(1, DetectorClass::kPerson, {10, 0}, {0, 0}, 5);
    const auto cyc = line(2, DetectorClass::kBike, {15, 0}, {0, 0}, 5);
    for (Rule r : {Rule::kDistanceOnly, Rule::kNaiveClosing, Rule::kTtc}) {
      CHECK(baseline_decide(r, {cyc}, seen_at(3), 3, kSelected, kFps).state == State::kIdle);
      CHECK(baseline_decide(r, {ped, cyc}, CyclistMemory{}, 3, kSelected, kFps).state == State::kSafe);
    }
  }
}

TEST_CASE("rule names round trip") {
  for (Rule r : {Rule::kPairwise, Rule::kDistanceOnly, Rule::kNaiveClosing, Rule::kTtc}) {
    CHECK(rule_from_string(to_string(r)) == r);
  }
  CHECK_THROWS(rule_from_string("magic"));
}

TEST_CASE("pipeline parameter validation") {
  PipelineParams p;
  CHECK_NOTHROW(p.validate());
  p.d_max = p.d_min;
  CHECK_THROWS(p.validate());
  p = {};
  p.k_lookback = 0;
  CHECK_THROWS(p.validate());
  p = {};
  p.k_lookback = kMaxLookback + 1;
  CHECK_THROWS(p.validate());
  p = {};
  p.n_memory = 0;
  CHECK_THROWS(p.validate());
}

namespace {

std::vector<DecisionTrack> random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-15, 15), vel(-0.3, 0.3);
  std::vector<DecisionTrack> tracks;
  int id = 1;
  for (int i = 0; i < 2; ++i) {
    tracks.push_back(line(id++, DetectorClass::kPerson, {pos(rng), pos(rng)}, {vel(rng) / 4, vel(rng) / 4}, 4));
  }
  for (int i = 0; i < 2; ++i) {
    tracks.push_back(line(id++, DetectorClass::kBike, {pos(rng), pos(rng)}, {vel(rng), vel(rng)}, 4));
  }
  return tracks;
}

}  // namespace

TEST_CASE("decision properties on random scenes") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shift(-100, 100);
  int alerts = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto tracks = random_scene(rng);
    const auto d = decide(tracks, seen_at(0), 0, kSelected);

    // translation invariance
    auto moved = tracks;
    const Eigen::Vector2d off(shift(rng), shift(rng));
    for (auto& t : moved) {
      for (auto& p : t.history) p += off;
    }
    const auto dm = decide(moved, seen_at(0), 0, kSelected);
    CHECK(dm.state == d.state);
    CHECK(dm.pair == d.pair);

    // the logged pair satisfies every closing condition
    if (d.state == State::kAlert) {
      ++alerts;
      REQUIRE(d.pair);
      const DecisionTrack *c = nullptr, *p = nullptr;
      for (const auto& t : tracks) {
        if (t.id == d.pair->first) c = &t;
        if (t.id == d.pair->second) p = &t;
      }
      REQUIRE(c);
      REQUIRE(p);
      CHECK(c->cls == DetectorClass::kBike);
      CHECK(p->cls == DetectorClass::kPerson);
      const int k = kSelected.k_lookback;
      const auto n = c->history.size();
      const double d_t = (c->history[n - 1] - p->history[n - 1]).norm();
      const double d_k = (c->history[n - 1 - k] - p->history[n - 1 - k]).norm();
      CHECK(d_t >= kSelected.d_min);
      CHECK(d_t <= kSelected.d_max);
      CHECK(d_t < d_k);
      CHECK((c->history[n - 1] - c->history[n - 1 - k]).norm() > kSelected.delta_min);
    } else {
      CHECK_FALSE(d.pair);
    }

    // enlarging the window never removes an ALERT
    PipelineParams wide = kSelected;
    wide.d_min = 0.5;
    wide.d_max = 30.0;
    if (d.state == State::kAlert) CHECK(decide(tracks, seen_at(0), 0, wide).state == State::kAlert);
  }
  CHECK(alerts > 100);
}

TEST_CASE("telemetry message") {
  Tracker tr;
  for (int f = 0; f < 6; ++f) {
    tr.update({obs("a", AgentClass::kCyclist, 0.2 * f, 1), obs("b", AgentClass::kPedestrian, 5, 0)}, f);
  }
  const auto m = telemetry_message(5, kFps, tr.tracks());
  CHECK(m.at("frame") == 5);
  CHECK(m.at("ts").get<double>() == Approx(5 / kFps));
  REQUIRE(m.at("objects").size() == 2);
  for (const auto& o : m.at("objects")) {
    CHECK(o.contains("id"));
    CHECK(o.at("pos").size() == 2);
    CHECK(o.at("vel").size() == 2);
    CHECK(o.at("history").size() == 6);
    CHECK(o.at("history")[0].size() == 3);
    if (o.at("class") == "bike") CHECK(o.at("vel")[0].get<double>() > 0.0);
  }
}

TEST_CASE("perception applies latency compensation per order") {
  for (int order : {0, 1, 2}) {
    Perception per(6, order);
    for (int f = 0; f < 60; ++f) {
      per.step({obs("c", AgentClass::kCyclist, 0.2 * f, 0), obs("p", AgentClass::kPedestrian, 20, 0)}, f);
    }
    REQUIRE(per.decision_tracks().size() == 2);
    CHECK(per.bike_detected());
    for (const auto& t : per.decision_tracks()) {
      if (t.cls != DetectorClass::kBike) continue;
      const double x = t.history.back().x();
      if (order == 0) CHECK(x == Approx(0.2 * 59));
      if (order >= 1) CHECK(x == Approx(0.2 * 65).epsilon(1e-6));
    }
  }
  CHECK_THROWS(Perception(0, 3));
}
