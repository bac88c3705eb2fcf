// Hand-built scenario fixtures, independent of the synthetic generator.
#pragma once

#include <nlohmann/json.hpp>

#include "bevplan/scene/types.hpp"
#include "support/test_util.hpp"

namespace testutil {

// Straight two-lane road along +x, ego at the origin, T-step straight human.
inline nlohmann::json minimal_scenario_json(int steps = 8, double speed = 4.0) {
  using nlohmann::json;
  json j;
  j["ego"] = {{"pose", {0.0, 0.0, 0.0}}, {"speed", speed}, {"accel", 0.0},
              {"width", 2.0},            {"length", 4.5}};
  j["ego_history"] = json::array(
      {{-2.0 * 0.5 * speed, 0.0, 0.0}, {-0.5 * speed, 0.0, 0.0}});
  j["agents"] = json::array();
  j["drivable_area"] =
      json::array({{{-20.0, -3.5}, {80.0, -3.5}, {80.0, 5.25}, {-20.0, 5.25}}});
  json line = json::array();
  for (double x = -20.0; x <= 80.0; x += 5.0) line.push_back({x, 0.0, 0.0});
  j["centerlines"] = json::array({line});
  j["traffic_lights"] = json::array();
  json route = json::array();
  for (double x = -20.0; x <= 80.0; x += 5.0) route.push_back({x, 0.0});
  j["route"] = route;
  json poses = json::array();
  for (int k = 1; k <= steps; ++k) poses.push_back({speed * 0.5 * k, 0.0, 0.0});
  j["human_trajectory"] = {{"dt", 0.5}, {"poses", poses}};
  j["prev_plan"] = nullptr;
  j["camera"] = {{"fx", 500.0}, {"fy", 500.0}, {"cx", 400.0},
                 {"cy", 300.0}, {"width", 800}, {"height", 600},
                 {"R", {0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0}},
                 {"t", {0.0, 1.4, -1.5}}};
  j["detections2d"] = {{"lane_lines", json::array()}, {"obstacles", json::array()}};
  j["tags"] = json::array();
  return j;
}

}  // namespace testutil
