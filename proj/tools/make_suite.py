"""Writes the 24-scenario conformance suite to data/scenarios.

World frame: the primary camera stands at the origin facing +x. The main
street runs along x with its bike lane at y = -1.5 .. -2.5; crosswalks cross
it along y. Cyclists enter the scene shortly before the danger interval so
that each file is a self-contained encounter.

Run from the repository root: python3 tools/make_suite.py
"""
import json
import math
import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join("data", "scenarios")


def r3(v):
    return round(v, 3)


def route(t0, start, legs):
    """Waypoints for a piecewise-linear route.

    legs: ((x, y), speed) moves to a point at constant speed;
          (None, seconds) waits in place.
    """
    t, (x, y) = t0, start
    wps = [[r3(t), r3(x), r3(y)]]
    for target, value in legs:
        if target is None:
            t += value
        else:
            t += math.hypot(target[0] - x, target[1] - y) / value
            x, y = target
        wps.append([r3(t), r3(x), r3(y)])
    return wps


def accelerate(t0, start, direction, v0, v1, accel, then_distance, step=0.25):
    """Constant acceleration from v0 to v1 along a unit direction, sampled
    every `step` seconds, followed by `then_distance` metres at v1."""
    dx, dy = direction
    n = math.hypot(dx, dy)
    dx, dy = dx / n, dy / n
    wps = []
    duration = (v1 - v0) / accel
    k = 0
    while True:
        tau = min(k * step, duration)
        s = v0 * tau + 0.5 * accel * tau * tau
        wps.append([r3(t0 + tau), r3(start[0] + dx * s), r3(start[1] + dy * s)])
        if tau >= duration:
            break
        k += 1
    t_end, x_end, y_end = wps[-1]
    t_last = t_end + then_distance / v1
    wps.append([r3(t_last), r3(x_end + dx * then_distance), r3(y_end + dy * then_distance)])
    return wps


def agent(aid, cls, wps, interpolation="linear", occluded=None):
    a = {"id": aid, "class": cls, "interpolation": interpolation, "waypoints": wps}
    if occluded:
        a["occluded"] = occluded
    return a


def scenario(sid, name, category, duration, agents):
    return {"id": sid, "name": name, "category": category, "duration_s": duration, "fps": 30, "agents": agents}


def build():
    s = []

    # --- safe: no cyclist present -------------------------------------
    s.append(scenario("solo_crossing", "Solo Pedestrian Crossing", "safe", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (12.0, -7.0), [(None, 1.5), ((12.0, 7.0), 1.4)])),
    ]))
    s.append(scenario("group_crossing", "Group Crossing", "safe", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (11.4, -7.0), [(None, 1.0), ((11.4, 7.0), 1.3)])),
        agent("ped2", "pedestrian", route(0.0, (12.2, -7.2), [(None, 1.2), ((12.2, 7.0), 1.5)])),
        agent("ped3", "pedestrian", route(0.0, (12.8, 7.0), [(None, 0.5), ((12.8, -7.0), 1.4)])),
        agent("ped4", "pedestrian", route(0.0, (11.8, 7.4), [(None, 2.0), ((11.8, -7.0), 1.2)])),
    ]))
    s.append(scenario("crossing_with_car", "Crossing With Passing Car", "safe", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (12.0, 7.0), [(None, 4.0), ((12.0, -7.0), 1.4)])),
        agent("car1", "car", route(0.0, (1.0, -5.0), [((40.0, -5.0), 11.0)])),
    ]))

    # --- standard -------------------------------------------------------
    # Head-on on a shared path: pedestrian walks +x, cyclist rides -x.
    s.append(scenario("head_on", "Head-On Approach", "standard", 10.0, [
        agent("ped1", "pedestrian", route(0.0, (2.0, -1.2), [((16.0, -1.2), 1.4)])),
        agent("cyc1", "cyclist", route(2.4, (26.0, -2.0), [((0.5, -2.0), 5.0)])),
    ]))
    # Cyclist from behind the camera meets a pedestrian on the far crosswalk.
    s.append(scenario("perpendicular_crossing", "Perpendicular Crossing", "standard", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (18.0, -8.0), [(None, 1.0), ((18.0, 7.0), 1.4)])),
        agent("cyc1", "cyclist", route(1.95, (0.5, -2.0), [((36.0, -2.0), 5.5)])),
    ]))
    s.append(scenario("far_side_crossing", "Far-Side Crossing", "standard", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (8.0, 7.0), [(None, 1.0), ((8.0, -7.0), 1.4)])),
        agent("cyc1", "cyclist", route(3.1, (26.0, -1.8), [((0.5, -1.8), 5.0)])),
    ]))
    s.append(scenario("overtaking", "Overtaking Pedestrian", "standard", 14.0, [
        agent("ped1", "pedestrian", route(0.0, (5.0, -1.0), [((24.0, -1.0), 1.4)])),
        agent("cyc1", "cyclist", route(6.6, (0.3, -1.8), [((34.0, -1.8), 5.0)])),
    ]))
    s.append(scenario("near_miss_behind", "Near Miss Behind Pedestrian", "standard", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (14.0, -8.0), [((14.0, 7.0), 1.4)])),
        agent("cyc1", "cyclist", route(1.2, (0.5, -6.0), [((30.0, -6.0), 5.0)])),
    ]))
    s.append(scenario("slow_cyclist", "Slow Cyclist Approach", "standard", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (12.0, 7.0), [(None, 1.0), ((12.0, -7.0), 1.3)])),
        agent("cyc1", "cyclist", route(5.2, (20.0, -1.8), [((0.5, -1.8), 3.0)])),
    ]))

    # --- high speed and acceleration ------------------------------------
    # Enters already inside the imminent tier.
    s.append(scenario("fast_approach", "Fast Approach", "high_speed", 9.0, [
        agent("ped1", "pedestrian", route(0.0, (21.0, -8.0), [((21.0, 6.0), 1.4)])),
        agent("cyc1", "cyclist", route(3.75, (0.5, -2.0), [((40.0, -2.0), 12.0)])),
    ]))
    s.append(scenario("commuter_30kmh", "Commuter at 30 km/h", "high_speed", 9.0, [
        agent("ped1", "pedestrian", route(0.0, (10.0, 7.0), [((10.0, -7.0), 1.4)])),
        agent("cyc1", "cyclist", route(2.0, (34.0, -2.0), [((0.5, -2.0), 8.33)])),
    ]))
    s.append(scenario("accelerating_cyclist", "Accelerating Cyclist", "high_speed", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (20.0, -8.0), [((20.0, 6.0), 1.4)])),
        agent("cyc1", "cyclist", accelerate(2.0, (0.5, -2.0), (1.0, 0.0), 2.0, 8.0, 2.0, 20.0)),
    ]))

    # --- accessibility ----------------------------------------------------
    s.append(scenario("wheelchair_crossing", "Wheelchair User Crossing", "accessibility", 14.0, [
        agent("wc1", "wheelchair", route(0.0, (15.0, -7.0), [((15.0, 6.0), 0.9)])),
        agent("cyc1", "cyclist", route(3.85, (0.5, -1.8), [((32.0, -1.8), 4.5)])),
    ]))
    s.append(scenario("child_pedestrian", "Child Pedestrian", "accessibility", 10.0, [
        agent("child1", "child", route(0.0, (13.0, 4.0), [(None, 2.0), ((13.0, -6.0), 2.2)])),
        agent("cyc1", "cyclist", route(1.4, (0.5, -2.0), [((30.0, -2.0), 4.5)])),
    ]))

    # --- multi-agent ------------------------------------------------------
    s.append(scenario("dense_group", "Dense Pedestrian Group", "multi_agent", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (11.5, 7.0), [(None, 1.0), ((11.5, -7.0), 1.3)])),
        agent("ped2", "pedestrian", route(0.0, (12.3, 7.3), [(None, 1.2), ((12.3, -7.0), 1.4)])),
        agent("ped3", "pedestrian", route(0.0, (13.1, 7.0), [(None, 0.8), ((13.1, -7.0), 1.2)])),
        agent("ped4", "pedestrian", route(0.0, (12.0, -7.0), [(None, 2.5), ((12.0, 7.0), 1.5)])),
        agent("ped5", "pedestrian", route(0.0, (12.8, -7.5), [(None, 3.0), ((12.8, 7.0), 1.3)])),
        agent("cyc1", "cyclist", route(4.9, (28.0, -1.8), [((0.5, -1.8), 5.0)])),
    ]))
    # A faster cyclist overtakes a slower one; the slower one is briefly
    # hidden behind it. Before that a cyclist follows a jogger toward the
    # camera, away from the crosswalk.
    s.append(scenario("multi_speed", "Multi-Speed", "multi_agent", 13.0, [
        agent("ped1", "pedestrian", route(0.0, (18.0, 7.0), [(None, 3.5), ((18.0, -7.0), 1.4)])),
        agent("jog1", "pedestrian", route(0.0, (11.0, 4.5), [((1.0, 4.5), 3.6)])),
        agent("cyc1", "cyclist", route(0.0, (16.0, 4.5), [((1.0, 4.5), 3.0)])),
        agent("cyc2", "cyclist", route(4.6, (0.5, -1.6), [((40.0, -1.6), 3.5)])),
        agent("cyc3", "cyclist", route(6.6, (0.5, -2.4), [((40.0, -2.4), 7.0)]), occluded=None),
    ]))
    s.append(scenario("cyclist_platoon", "Cyclist Platoon", "multi_agent", 12.0, [
        agent("ped1", "pedestrian", route(0.0, (14.0, -8.0), [(None, 1.0), ((14.0, 7.0), 1.4)])),
        agent("cyc1", "cyclist", route(2.0, (0.5, -1.8), [((36.0, -1.8), 5.0)])),
        agent("cyc2", "cyclist", route(3.2, (0.5, -1.8), [((36.0, -1.8), 5.0)])),
        agent("cyc3", "cyclist", route(4.4, (0.5, -1.8), [((36.0, -1.8), 5.0)])),
    ]))

    # --- edge cases -------------------------------------------------------
    # Brakes to a stop short of the crosswalk, waits, then rides on.
    abort = route(2.0, (0.5, -2.0), [((8.0, -2.0), 5.0)])
    t = abort[-1][0]
    for k in range(1, 9):  # 3 m/s^2 from 5 m/s, sampled every 0.208 s
        tau = k * 5.0 / 3.0 / 8
        abort.append([r3(t + tau), r3(8.0 + 5.0 * tau - 1.5 * tau * tau), -2.0])
    stop_x = abort[-1][1]
    abort += route(abort[-1][0], (stop_x, -2.0), [(None, 4.0), ((30.0, -2.0), 4.0)])[1:]
    s.append(scenario("cyclist_abort", "Cyclist Abort", "edge_case", 14.0, [
        agent("ped1", "pedestrian", route(0.0, (15.5, 7.0), [(None, 2.0), ((15.5, -7.0), 1.4)])),
        agent("cyc1", "cyclist", abort),
    ]))
    s.append(scenario("counter_flow", "Counter-Flow on Crosswalk", "edge_case", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (12.0, -7.0), [(None, 1.0), ((12.0, 8.0), 1.4)])),
        agent("ped2", "pedestrian", route(0.0, (12.6, -7.5), [(None, 1.5), ((12.6, 8.0), 1.2)])),
        agent("cyc1", "cyclist", route(1.0, (11.0, 20.0), [((11.0, 13.0), 4.0), ((12.3, 9.0), 4.0),
                                                            ((12.3, -10.0), 4.0)])),
    ]))
    # Hidden behind a parked van until it is already inside the imminent tier.
    s.append(scenario("occluded_emergence", "Occluded Emergence", "edge_case", 10.0, [
        agent("ped1", "pedestrian", route(0.0, (12.0, 6.0), [(None, 1.0), ((12.0, -7.0), 1.4)])),
        agent("cyc1", "cyclist", route(4.6, (6.0, -6.5), [((10.5, -2.0), 5.0), ((30.0, -2.0), 5.0)]),
              occluded=[[4.6, 4.9]]),
    ]))

    # --- non-linear -------------------------------------------------------
    s.append(scenario("swerving_cyclist", "Swerving Cyclist", "nonlinear", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (15.0, 2.5), [(None, 4.5), ((15.0, 7.0), 1.2)])),
        agent("cyc1", "cyclist", [[1.5, 0.5, -4.0], [3.0, 8.0, -4.0], [3.8, 12.0, -3.6], [4.4, 14.6, -1.0],
                                  [5.0, 16.6, 1.8], [6.5, 22.0, 4.5], [8.0, 29.0, 5.0]], "cubic"),
    ]))
    s.append(scenario("late_turn", "Late Turn", "nonlinear", 11.0, [
        agent("ped1", "pedestrian", route(0.0, (16.0, -8.0), [(None, 1.0), ((16.0, 7.0), 1.4)])),
        agent("cyc1", "cyclist", [[1.0, 6.0, -16.0], [2.6, 6.0, -8.0], [3.4, 7.2, -4.2], [4.1, 10.0, -2.2],
                                  [5.0, 14.5, -2.0], [7.0, 24.5, -2.0]], "cubic"),
    ]))
    # Turns back beyond the decision range, then returns along the far lane.
    s.append(scenario("u_turn", "U-Turn", "nonlinear", 13.5, [
        agent("ped1", "pedestrian", route(0.0, (6.0, -7.0), [(None, 5.3), ((6.0, 7.0), 1.3)])),
        agent("cyc1", "cyclist", [[0.3, 18.0, -2.0], [3.3, 30.0, -2.0], [4.5, 34.5, -0.5], [5.4, 33.5, 1.8],
                                  [6.3, 30.0, 2.0], [12.55, 5.0, 2.0], [13.05, 3.0, 2.0]], "cubic"),
    ]))
    s.append(scenario("ebike_acceleration", "E-bike Acceleration", "nonlinear", 10.0, [
        agent("ped1", "pedestrian", route(0.0, (22.0, -8.0), [((22.0, 6.0), 1.4)])),
        agent("ebike1", "ebike", accelerate(2.4, (0.5, -2.0), (1.0, 0.0), 3.0, 9.0, 3.0, 18.0)),
    ]))
    return s


def main():
    suite = build()
    os.makedirs(OUT, exist_ok=True)
    manifest = []
    for sc in suite:
        for a in sc["agents"]:
            if "occluded" in a and a["occluded"] is None:
                del a["occluded"]
        name = sc["id"] + ".json"
        with open(os.path.join(OUT, name), "w") as f:
            json.dump(sc, f, indent=1)
            f.write("\n")
        manifest.append({"id": sc["id"], "file": name, "category": sc["category"]})
    with open(os.path.join(OUT, "manifest.json"), "w") as f:
        json.dump({"scenarios": manifest}, f, indent=1)
        f.write("\n")
    print("wrote %d scenarios to %s" % (len(suite), OUT))


if __name__ == "__main__":
    main()
