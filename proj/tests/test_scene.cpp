#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "bevplan/scene/geometry.hpp"
#include "bevplan/scene/io.hpp"
#include "support/fixtures.hpp"
#include "support/test_util.hpp"

using namespace bevplan;
using scene::Obb;
using scene::Pose2;

namespace {

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2);
}

// Independent footprint oracle: corners in the body frame, then an explicit
// rotate-then-translate with a 2x2 matrix.
Obb footprint_oracle(const Pose2& pose, double width, double length) {
  const double local[4][2] = {{length / 2, width / 2},
                              {-length / 2, width / 2},
                              {-length / 2, -width / 2},
                              {length / 2, -width / 2}};
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  Obb out;
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] =
        Vec2(pose.x + c * local[i][0] - s * local[i][1],
             pose.y + s * local[i][0] + c * local[i][1]);
  }
  return out;
}

// Monte-Carlo containment oracle: samples points inside rectangle a and
// counts hits inside b (via the inverse-transform point test).
int mc_overlap_hits(const Pose2& pa, double wa, double la, const Pose2& pb, double wb,
                    double lb, Rng& rng, int samples) {
  const double cb = std::cos(pb.yaw), sb = std::sin(pb.yaw);
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    const double ux = rng.uniform(-la / 2, la / 2);
    const double uy = rng.uniform(-wa / 2, wa / 2);
    const double ca = std::cos(pa.yaw), sa = std::sin(pa.yaw);
    const double x = pa.x + ca * ux - sa * uy;
    const double y = pa.y + sa * ux + ca * uy;
    // Into b's body frame.
    const double dx = x - pb.x, dy = y - pb.y;
    const double bx = cb * dx + sb * dy;
    const double by = -sb * dx + cb * dy;
    if (std::abs(bx) <= lb / 2 && std::abs(by) <= wb / 2) ++hits;
  }
  return hits;
}

// Brute-force min distance between the boundaries of two rectangles.
double boundary_distance(const Obb& a, const Obb& b) {
  double best = 1e18;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      best = std::min(best, scene::distance_point_segment(a[i], b[k], b[(k + 1) % 4]));
      best = std::min(best, scene::distance_point_segment(b[i], a[k], a[(k + 1) % 4]));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("load_scenario accepts a minimal file with zero agents") {
  testutil::TempDir dir("scene");
  write_json(dir.str("min.json"), testutil::minimal_scenario_json());
  const scene::Scenario s = scene::load_scenario(dir.str("min.json"));
  CHECK(s.agents.empty());
  CHECK(s.id == "min");
  CHECK(s.human_trajectory.steps() == 8);
  CHECK(s.ego.speed == doctest::Approx(4.0));
}

TEST_CASE("load_scenario rejects an agent track of length T") {
  testutil::TempDir dir("scene");
  nlohmann::json j = testutil::minimal_scenario_json();
  nlohmann::json track = nlohmann::json::array();
  for (int k = 0; k < 8; ++k) track.push_back({5.0 + k, 0.0, 0.0});  // T, not T+1
  j["agents"].push_back({{"id", "a0"},
                         {"width", 2.0},
                         {"length", 4.5},
                         {"is_stationary", false},
                         {"track", track}});
  write_json(dir.str("bad.json"), j);
  CHECK_THROWS_WITH_AS(scene::load_scenario(dir.str("bad.json")),
                       doctest::Contains("agents[0].track"), scene::ValidationError);
}

TEST_CASE("save/load round-trip is the structural identity") {
  testutil::TempDir dir("scene");
  nlohmann::json j = testutil::minimal_scenario_json();
  // Exercise optional parts: one agent, a light, prev_plan, detections, tags.
  nlohmann::json track = nlohmann::json::array();
  for (int k = 0; k <= 8; ++k) track.push_back({10.0 + 0.7 * k, 0.1, 0.01});
  j["agents"].push_back({{"id", "a0"},
                         {"width", 1.9},
                         {"length", 4.4},
                         {"is_stationary", false},
                         {"track", track}});
  j["traffic_lights"].push_back(
      {{"stop_line", {{12.0, -1.75}, {12.0, 1.75}}}, {"state", "red"}});
  nlohmann::json prev = nlohmann::json::array();
  for (int k = 0; k < 8; ++k) prev.push_back({2.0 * k, 0.05, 0.0});
  j["prev_plan"] = {{"dt", 0.5}, {"poses", prev}};
  j["detections2d"] = {{"lane_lines", {{{100.0, 400.0}, {120.0, 300.0}}}},
                       {"obstacles", {{350.0, 280.0, 420.0, 330.0}}}};
  j["tags"] = {"occluded_junction"};
  write_json(dir.str("full.json"), j);

  const scene::Scenario s1 = scene::load_scenario(dir.str("full.json"));
  scene::save_scenario(s1, dir.str("resaved.json"));
  const scene::Scenario s2 = scene::load_scenario(dir.str("resaved.json"));
  CHECK(scene::scenario_to_json(s1) == scene::scenario_to_json(s2));
  CHECK(s2.prev_plan.has_value());
  CHECK(s2.agents.size() == 1);
  CHECK(s2.tags.count("occluded_junction") == 1);
}

TEST_CASE("loader fills omitted yaw by finite differences") {
  testutil::TempDir dir("scene");
  nlohmann::json j = testutil::minimal_scenario_json();
  nlohmann::json poses = nlohmann::json::array();
  for (int k = 1; k <= 8; ++k) poses.push_back({0.0, 1.0 * k});  // straight along +y
  j["human_trajectory"]["poses"] = poses;
  write_json(dir.str("noyaw.json"), j);
  const scene::Scenario s = scene::load_scenario(dir.str("noyaw.json"));
  for (const Pose2& p : s.human_trajectory.poses) {
    CHECK(p.yaw == doctest::Approx(bevplan::kPi / 2));
  }
}

TEST_CASE("loader validation rejects each mutated constrained field") {
  testutil::TempDir dir("scene");
  using nlohmann::json;
  const auto expect_invalid = [&](json j, const char* tag) {
    CAPTURE(tag);
    write_json(dir.str("mut.json"), j);
    CHECK_THROWS_AS(scene::load_scenario(dir.str("mut.json")), scene::ValidationError);
  };
  json base = testutil::minimal_scenario_json();

  json j = base;
  j["ego"]["width"] = -1.0;
  expect_invalid(j, "ego.width");
  j = base;
  j["ego"]["speed"] = -0.1;
  expect_invalid(j, "ego.speed");
  j = base;
  j["human_trajectory"]["dt"] = 0.0;
  expect_invalid(j, "dt");
  j = base;
  j["human_trajectory"]["poses"] = json::array();
  expect_invalid(j, "empty human");
  j = base;
  j["drivable_area"][0] = {{0.0, 0.0}, {1.0, 0.0}};
  expect_invalid(j, "two-vertex polygon");
  j = base;
  j["drivable_area"][0] = {{-20.0, 5.25}, {80.0, 5.25}, {80.0, -3.5}, {-20.0, -3.5}};
  expect_invalid(j, "clockwise polygon");
  j = base;
  j["route"] = json::array();
  expect_invalid(j, "empty route");
  j = base;
  j["camera"]["fx"] = 0.0;
  expect_invalid(j, "camera.fx");
  j = base;
  j["traffic_lights"].push_back({{"stop_line", {{0.0, 0.0}, {1.0, 0.0}}}, {"state", "blue"}});
  expect_invalid(j, "light state");
  j = base;
  j["detections2d"]["obstacles"].push_back({10.0, 10.0, 5.0, 20.0});
  expect_invalid(j, "inverted box");
  j = base;
  {
    json prev = json::array();
    for (int k = 0; k < 5; ++k) prev.push_back({1.0 * k, 0.0, 0.0});
    j["prev_plan"] = {{"dt", 0.5}, {"poses", prev}};
  }
  expect_invalid(j, "prev_plan length");
  j = base;
  j["ego"]["pose"] = {0.0, std::nan(""), 0.0};
  expect_invalid(j, "nan coordinate");
}

TEST_CASE("ego_footprint axis-aligned and rotated cases") {
  const Obb box = scene::ego_footprint({0.0, 0.0, 0.0}, 2.0, 4.0);
  // Corners at (+-2, +-1): length along x, width along y.
  for (const Vec2& c : box) {
    CHECK(std::abs(c.x()) == doctest::Approx(2.0));
    CHECK(std::abs(c.y()) == doctest::Approx(1.0));
  }
  const Obb rot = scene::ego_footprint({0.0, 0.0, bevplan::kPi / 2}, 2.0, 4.0);
  for (const Vec2& c : rot) {
    CHECK(std::abs(c.x()) == doctest::Approx(1.0));
    CHECK(std::abs(c.y()) == doctest::Approx(2.0));
  }
}

TEST_CASE("ego_footprint matches the rotate-then-translate oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose2 pose{rng.uniform(-50, 50), rng.uniform(-50, 50),
                     rng.uniform(-bevplan::kPi, bevplan::kPi)};
    const double w = rng.uniform(0.5, 4.0), l = rng.uniform(0.5, 8.0);
    const Obb got = scene::ego_footprint(pose, w, l);
    const Obb want = footprint_oracle(pose, w, l);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(got[i].x() == doctest::Approx(want[i].x()).epsilon(1e-12));
      CHECK(got[i].y() == doctest::Approx(want[i].y()).epsilon(1e-12));
    }
    // Centroid equals the pose position; CCW orientation; exact area.
    const Vec2 centroid = (got[0] + got[1] + got[2] + got[3]) / 4.0;
    CHECK(centroid.x() == doctest::Approx(pose.x));
    CHECK(centroid.y() == doctest::Approx(pose.y));
    double area2 = 0.0;
    for (std::size_t i = 0, j = 3; i < 4; j = i++) {
      area2 += got[j].x() * got[i].y() - got[i].x() * got[j].y();
    }
    CHECK(area2 / 2.0 == doctest::Approx(w * l).epsilon(1e-9));
  }
}

TEST_CASE("obb_intersects trivial cases") {
  const Obb a = scene::ego_footprint({0, 0, 0.3}, 2.0, 4.0);
  CHECK(scene::obb_intersects(a, a));
  const Obb far = scene::ego_footprint({10.0, 0.0, 0.0}, 1.0, 1.0);
  const Obb origin = scene::ego_footprint({0.0, 0.0, 0.0}, 1.0, 1.0);
  CHECK_FALSE(scene::obb_intersects(origin, far));
  // Exact edge contact counts as intersecting.
  const Obb touch = scene::ego_footprint({1.0, 0.0, 0.0}, 1.0, 1.0);
  CHECK(scene::obb_intersects(origin, touch));
}

TEST_CASE("obb_intersects agrees with the Monte-Carlo containment oracle") {
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Pose2 pa{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-bevplan::kPi, bevplan::kPi)};
    const Pose2 pb{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-bevplan::kPi, bevplan::kPi)};
    const double wa = rng.uniform(0.5, 3.0), la = rng.uniform(0.5, 6.0);
    const double wb = rng.uniform(0.5, 3.0), lb = rng.uniform(0.5, 6.0);
    const Obb a = scene::ego_footprint(pa, wa, la);
    const Obb b = scene::ego_footprint(pb, wb, lb);
    const bool got = scene::obb_intersects(a, b);
    const int hits = mc_overlap_hits(pa, wa, la, pb, wb, lb, rng, 10000) +
                     mc_overlap_hits(pb, wb, lb, pa, wa, la, rng, 10000);
    if (hits >= 5) {
      CHECK(got);
      ++checked;
    } else if (hits == 0 && boundary_distance(a, b) > 0.05) {
      CHECK_FALSE(got);
      ++checked;
    }  // near-tangent pairs are outside the oracle's resolution
  }
  CHECK(checked > 200);
}

TEST_CASE("obb_intersects is symmetric and rigid-transform equivariant") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose2 pa{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-3, 3)};
    const Pose2 pb{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-3, 3)};
    const Obb a = scene::ego_footprint(pa, 1.5, 3.0);
    const Obb b = scene::ego_footprint(pb, 2.0, 2.0);
    CHECK(scene::obb_intersects(a, b) == scene::obb_intersects(b, a));
    const double yaw = rng.uniform(-3, 3);
    const Vec2 t(rng.uniform(-30, 30), rng.uniform(-30, 30));
    const Mat2 r = rotation2(yaw);
    Obb a2, b2;
    for (std::size_t i = 0; i < 4; ++i) {
      a2[i] = r * a[i] + t;
      b2[i] = r * b[i] + t;
    }
    CHECK(scene::obb_intersects(a, b) == scene::obb_intersects(a2, b2));
  }
}

TEST_CASE("point_in_drivable containment conventions") {
  const scene::Polygon convex = {{0, 0}, {4, 0}, {4, 3}, {0, 3}};
  const std::vector<scene::Polygon> area = {convex};
  CHECK(scene::point_in_drivable(Vec2(2.0, 1.5), area));   // centroid
  CHECK_FALSE(scene::point_in_drivable(Vec2(9.0, 9.0), area));
  CHECK(scene::point_in_drivable(Vec2(0.0, 0.0), area));   // boundary vertex
  CHECK(scene::point_in_drivable(Vec2(2.0, 0.0), area));   // boundary edge
  // Union of two polygons.
  const std::vector<scene::Polygon> both = {convex, {{10, 10}, {12, 10}, {12, 12}, {10, 12}}};
  CHECK(scene::point_in_drivable(Vec2(11.0, 11.0), both));
}

TEST_CASE("signed distance to drivable boundary") {
  const std::vector<scene::Polygon> area = {{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  CHECK(scene::signed_distance_to_drivable_boundary(Vec2(5, 5), area) == doctest::Approx(5.0));
  CHECK(scene::signed_distance_to_drivable_boundary(Vec2(5, -2), area) == doctest::Approx(-2.0));
  CHECK(scene::signed_distance_to_drivable_boundary(Vec2(5, 0), area) == doctest::Approx(0.0));
}

TEST_CASE("arclength projection along a route") {
  const scene::Polyline route = {{0, 0}, {10, 0}, {10, 5}};
  CHECK(scene::arclength_projection(Vec2(3.0, 1.0), route) == doctest::Approx(3.0));
  CHECK(scene::arclength_projection(Vec2(11.0, 2.0), route) == doctest::Approx(12.0));
  CHECK(scene::arclength_projection(Vec2(-5.0, 0.0), route) == doctest::Approx(0.0));
}

TEST_CASE("nearest centerline returns the stored segment direction") {
  scene::Centerline line;
  for (double x = 0.0; x <= 10.0; x += 2.0) line.push_back({x, 0.0, 0.25});
  const scene::CenterlineQuery q = scene::nearest_centerline(Vec2(3.0, 1.0), {line});
  CHECK(q.valid);
  CHECK(q.distance == doctest::Approx(1.0));
  CHECK(q.theta == doctest::Approx(0.25));
  CHECK_FALSE(scene::nearest_centerline(Vec2(0, 0), {}).valid);
}

TEST_CASE("wrap_angle lands in (-pi, pi] and is identity in range") {
  CHECK(wrap_angle(0.5) == 0.5);
  CHECK(wrap_angle(-3.0) == -3.0);
  CHECK(wrap_angle(bevplan::kPi) == doctest::Approx(bevplan::kPi));
  CHECK(wrap_angle(-bevplan::kPi) == doctest::Approx(bevplan::kPi));
  CHECK(wrap_angle(3 * bevplan::kPi) == doctest::Approx(bevplan::kPi));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2 * bevplan::kPi));
}
