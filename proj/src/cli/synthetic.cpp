#include "bevplan/cli/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "bevplan/rng.hpp"
#include "bevplan/scene/geometry.hpp"
#include "bevplan/scene/io.hpp"

namespace bevplan::cli {

using scene::Agent;
using scene::CenterlinePoint;
using scene::Pose2;
using scene::Scenario;
using scene::Trajectory;

namespace {

constexpr Scalar kLaneHalf = 1.75;
constexpr Scalar kAgentWidth = 1.9;
constexpr Scalar kAgentLength = 4.4;

// Road-frame path abstraction: straight or constant-curvature arc from the
// origin heading +x.
struct Path {
  Scalar curvature = 0.0;

  Vec2 at(Scalar s) const {
    if (std::abs(curvature) < 1e-12) return Vec2(s, 0.0);
    return Vec2(std::sin(curvature * s) / curvature,
                (1.0 - std::cos(curvature * s)) / curvature);
  }
  Scalar heading(Scalar s) const { return curvature * s; }
  Vec2 left_normal(Scalar s) const {
    const Scalar h = heading(s);
    return Vec2(-std::sin(h), std::cos(h));
  }
  Vec2 offset(Scalar s, Scalar lateral) const { return at(s) + lateral * left_normal(s); }
};

scene::Polygon ccw(scene::Polygon poly) {
  Scalar area2 = 0.0;
  for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
    area2 += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  }
  if (area2 < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

std::vector<Scalar> arc_samples(Scalar s0, Scalar s1, Scalar step) {
  std::vector<Scalar> out;
  for (Scalar s = s0; s < s1 - 1e-9; s += step) out.push_back(s);
  out.push_back(s1);
  return out;
}

scene::Polygon band_polygon(const Path& path, Scalar s0, Scalar s1, Scalar lat_lo,
                            Scalar lat_hi, Scalar step = 2.5) {
  scene::Polygon poly;
  const std::vector<Scalar> samples = arc_samples(s0, s1, step);
  for (Scalar s : samples) poly.push_back(path.offset(s, lat_lo));
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    poly.push_back(path.offset(*it, lat_hi));
  }
  return ccw(poly);
}

scene::Centerline path_centerline(const Path& path, Scalar s0, Scalar s1, Scalar lateral,
                                  Scalar step = 2.0) {
  scene::Centerline line;
  for (Scalar s : arc_samples(s0, s1, step)) {
    const Vec2 p = path.offset(s, lateral);
    line.push_back({p.x(), p.y(), wrap_angle(path.heading(s))});
  }
  return line;
}

// Poses along a path with a per-step speed profile; returns road-frame poses
// at s(t_k), t_k = k*dt, k = 1..steps.
std::vector<Pose2> rollout_path(const Path& path, Scalar s_start, Scalar lateral,
                                const std::vector<Scalar>& speeds, Scalar dt) {
  std::vector<Pose2> poses;
  Scalar s = s_start;
  for (Scalar v : speeds) {
    s += v * dt;
    const Vec2 p = path.offset(s, lateral);
    poses.push_back({p.x(), p.y(), wrap_angle(path.heading(s))});
  }
  return poses;
}

std::vector<Scalar> speed_profile(Scalar v0, Scalar accel, int steps, Scalar dt) {
  std::vector<Scalar> speeds;
  Scalar v = v0;
  for (int k = 0; k < steps; ++k) {
    v = std::max(0.0, v + accel * dt);
    speeds.push_back(v);
  }
  return speeds;
}

// Converts a road-frame pose into the ego frame of `ego`.
Pose2 to_ego_frame(const Pose2& p, const Pose2& ego) {
  const Mat2 r = rotation2(-ego.yaw);
  const Vec2 q = r * (p.position() - ego.position());
  return {q.x(), q.y(), wrap_angle(p.yaw - ego.yaw)};
}

scene::CameraModel front_camera() {
  scene::CameraModel cam;
  cam.fx = cam.fy = 500.0;
  cam.cx = 400.0;
  cam.cy = 300.0;
  cam.width = 800;
  cam.height = 600;
  // Ego (x fwd, y left, z up) to camera (x right, y down, z fwd), mounted
  // 1.5 m ahead of the ego center at 1.4 m height.
  cam.rotation << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  const Vec3 center(1.5, 0.0, 1.4);
  cam.translation = -(cam.rotation * center);
  return cam;
}

bool project_point(const scene::CameraModel& cam, const Vec3& p_ego, Vec2* pixel) {
  const Vec3 pc = cam.rotation * p_ego + cam.translation;
  if (pc.z() < 0.5) return false;
  *pixel = Vec2(cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy);
  return true;
}

// Projects the ego-lane edges into the image as detected lane lines.
void add_lane_detections(Scenario& s, const Path& path, Scalar lane_center,
                         const Pose2& ego_road) {
  for (Scalar lateral : {lane_center - kLaneHalf, lane_center + kLaneHalf}) {
    std::vector<Vec2> line;
    for (Scalar dist = 3.0; dist <= 45.0; dist += 3.0) {
      const Vec2 road = path.offset(dist, lateral);
      const Pose2 ego_pt = to_ego_frame({road.x(), road.y(), 0.0}, ego_road);
      Vec2 px;
      if (!project_point(s.camera, Vec3(ego_pt.x, ego_pt.y, 0.0), &px)) continue;
      if (px.x() < 0.0 || px.x() > s.camera.width || px.y() < 0.0 || px.y() > s.camera.height) {
        continue;
      }
      line.push_back(px);
    }
    if (line.size() >= 2) s.detections2d.lane_lines.push_back(std::move(line));
  }
}

// Projects visible agents into axis-aligned image boxes (footprint corners
// at ground level and roof height).
void add_obstacle_detections(Scenario& s, const Pose2& ego_road) {
  for (const Agent& a : s.agents) {
    const Pose2 local = to_ego_frame(a.track.front(), ego_road);
    if (local.x < 2.0 || local.x > 50.0 || std::abs(local.y) > 15.0) continue;
    const scene::Obb box = scene::ego_footprint(local, a.width, a.length);
    Scalar u0 = 1e9, v0 = 1e9, u1 = -1e9, v1 = -1e9;
    bool all_visible = true;
    for (const Vec2& corner : box) {
      for (Scalar z : {0.0, 1.6}) {
        Vec2 px;
        if (!project_point(s.camera, Vec3(corner.x(), corner.y(), z), &px)) {
          all_visible = false;
          break;
        }
        u0 = std::min(u0, px.x());
        v0 = std::min(v0, px.y());
        u1 = std::max(u1, px.x());
        v1 = std::max(v1, px.y());
      }
      if (!all_visible) break;
    }
    if (!all_visible) continue;
    u0 = std::clamp(u0, 0.0, static_cast<Scalar>(s.camera.width));
    u1 = std::clamp(u1, 0.0, static_cast<Scalar>(s.camera.width));
    v0 = std::clamp(v0, 0.0, static_cast<Scalar>(s.camera.height));
    v1 = std::clamp(v1, 0.0, static_cast<Scalar>(s.camera.height));
    if ((u1 - u0) * (v1 - v0) < 25.0) continue;
    s.detections2d.obstacles.push_back({u0, v0, u1, v1});
  }
}

Agent make_path_agent(const std::string& id, const Path& path, Scalar s0, Scalar lateral,
                      Scalar speed, int steps, Scalar dt) {
  Agent a;
  a.id = id;
  a.width = kAgentWidth;
  a.length = kAgentLength;
  a.is_stationary = speed == 0.0;
  Scalar s = s0;
  for (int k = 0; k <= steps; ++k) {
    const Vec2 p = path.offset(s, lateral);
    a.track.push_back({p.x(), p.y(), wrap_angle(path.heading(s))});
    s += speed * dt;
  }
  return a;
}

Agent make_straight_agent(const std::string& id, const Vec2& start, Scalar yaw, Scalar speed,
                          int steps, Scalar dt) {
  Agent a;
  a.id = id;
  a.width = kAgentWidth;
  a.length = kAgentLength;
  a.is_stationary = speed == 0.0;
  const Vec2 dir(std::cos(yaw), std::sin(yaw));
  for (int k = 0; k <= steps; ++k) {
    const Vec2 p = start + speed * dt * k * dir;
    a.track.push_back({p.x(), p.y(), yaw});
  }
  return a;
}

}  // namespace

Scenario generate_scenario(std::uint64_t seed, int index, const SyntheticParams& params) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1)));
  const int steps = params.steps;
  const Scalar dt = params.dt;
  const Scalar horizon = steps * dt;

  // Layout cycle; indices 5 and 7 plant humans that violate metrics.
  const int slot = index % 10;
  enum { kStraight, kCurve, kJunction } kind;
  if (slot == 0 || slot == 1 || slot == 7 || slot == 9) {
    kind = kStraight;
  } else if (slot == 2 || slot == 3 || slot == 8) {
    kind = kCurve;
  } else {
    kind = kJunction;
  }
  const bool human_drifts_offroad = slot == 7;
  const bool human_runs_red = slot == 5;

  Scenario s;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scenario_%04d", index);
  s.id = buf;
  s.camera = front_camera();

  Scalar v = rng.uniform(1.5, 10.0);

  Path path;        // ego road reference
  Scalar road_len = 90.0;
  bool tight_turn = false;
  if (kind == kCurve) {
    Scalar radius;
    if (slot == 8 && rng.bernoulli(0.5)) {
      tight_turn = true;
      radius = rng.uniform(3.0, 4.5);
      v = std::min(v, 2.5);
    } else {
      radius = rng.uniform(12.0, 45.0);
      // Keep the human comfortable on the arc.
      v = std::min(v, 0.95 * std::sqrt(3.5 * radius));
      v = std::min(v, 0.9 * radius);  // yaw-rate bound
    }
    path.curvature = (rng.bernoulli(0.5) ? 1.0 : -1.0) / radius;
    road_len = std::min(90.0, kPi / std::abs(path.curvature) * 0.9);
    // Keep the human on the built road.
    v = std::min(v, 0.85 * road_len / horizon);
  }

  // Inside edge of a left curve must stay short of the arc center.
  Scalar lat_hi = 3.0 * kLaneHalf;
  if (path.curvature > 1e-9) lat_hi = std::min(lat_hi, 1.0 / path.curvature - 0.5);
  const bool second_lane = 2.0 * kLaneHalf < lat_hi - 0.2;

  // Ego starts near the path origin with small jitter.
  const Pose2 ego_road{rng.uniform(-0.3, 0.3), rng.uniform(-0.25, 0.25),
                       rng.uniform(-0.04, 0.04)};
  s.ego.pose = ego_road;
  s.ego.speed = v;
  s.ego.accel = rng.uniform(-0.5, 0.5);
  s.ego.width = 2.0;
  s.ego.length = 4.5;
  {
    const Vec2 dir(std::cos(ego_road.yaw), std::sin(ego_road.yaw));
    for (int k = 2; k >= 1; --k) {
      const Vec2 p = ego_road.position() - v * dt * k * dir;
      s.ego_history.push_back({p.x(), p.y(), ego_road.yaw});
    }
  }

  // Drivable area, centerlines, route.
  const Scalar s_back = -15.0;
  s.drivable_area.push_back(band_polygon(path, s_back, road_len, -kLaneHalf, lat_hi));
  s.centerlines.push_back(path_centerline(path, s_back, road_len, 0.0));
  const bool oncoming_lane = kind != kJunction && second_lane && rng.bernoulli(0.4);
  if (second_lane) {
    scene::Centerline second = path_centerline(path, s_back, road_len, 2.0 * kLaneHalf);
    if (oncoming_lane) {
      std::reverse(second.begin(), second.end());
      for (CenterlinePoint& p : second) p.theta = wrap_angle(p.theta + kPi);
    }
    s.centerlines.push_back(std::move(second));
  }
  for (Scalar dist : arc_samples(s_back, road_len, 2.0)) s.route.push_back(path.at(dist));

  Scalar junction_x = 0.0;
  bool red_light = false;
  if (kind == kJunction) {
    junction_x = rng.uniform(12.0, 22.0);
    // Cross road along y.
    scene::Polygon cross = {{junction_x - 2.0 * kLaneHalf, -40.0},
                            {junction_x + 2.0 * kLaneHalf, -40.0},
                            {junction_x + 2.0 * kLaneHalf, 40.0},
                            {junction_x - 2.0 * kLaneHalf, 40.0}};
    s.drivable_area.push_back(ccw(cross));
    scene::Centerline cross_line;
    for (Scalar y = -40.0; y <= 40.0; y += 2.5) {
      cross_line.push_back({junction_x - kLaneHalf, y, kPi / 2.0});
    }
    s.centerlines.push_back(std::move(cross_line));

    red_light = human_runs_red || rng.bernoulli(0.5);
    const Scalar stop_x = junction_x - 2.0 * kLaneHalf - 2.0;
    s.traffic_lights.push_back({Vec2(stop_x, -kLaneHalf), Vec2(stop_x, kLaneHalf),
                                red_light ? scene::LightState::kRed
                                          : scene::LightState::kGreen});
    if (red_light) {
      // Cross traffic has the green: one vehicle crossing during the horizon.
      const Scalar approach = rng.uniform(6.0, 14.0);
      const Scalar cross_speed = rng.uniform(4.0, 7.0);
      s.agents.push_back(make_straight_agent("cross0", Vec2(junction_x - kLaneHalf, -approach),
                                             kPi / 2.0, cross_speed, steps, dt));
    } else if (rng.bernoulli(0.6)) {
      // Cross traffic waiting at its line.
      s.agents.push_back(make_straight_agent("cross0", Vec2(junction_x - kLaneHalf, -6.5),
                                             kPi / 2.0, 0.0, steps, dt));
    }
    if (rng.bernoulli(0.3)) s.tags.insert("occluded_junction");
  }

  // Human trajectory (road frame first, converted to ego frame below).
  const Scalar ego_lat = path.curvature == 0.0 ? ego_road.y : 0.0;
  std::vector<Pose2> human_road;
  if (human_drifts_offroad) {
    // Quadratic drift off the right road edge.
    const Scalar target = -(kLaneHalf + 1.5 + rng.uniform(0.0, 1.0));
    Scalar x = ego_road.x;
    for (int k = 1; k <= steps; ++k) {
      const Scalar frac = static_cast<Scalar>(k) / steps;
      x += v * dt;
      human_road.push_back({x, ego_lat + target * frac * frac, 0.0});
    }
    scene::fill_yaw_from_positions(human_road);
    // fill_yaw treats the origin as the implicit previous point; redo in the
    // road frame based at the ego position.
    Vec2 prev = ego_road.position();
    Scalar yaw = ego_road.yaw;
    for (Pose2& p : human_road) {
      const Vec2 d = p.position() - prev;
      if (d.squaredNorm() > 0.0) yaw = std::atan2(d.y(), d.x());
      p.yaw = yaw;
      prev = p.position();
    }
  } else if (kind == kJunction && red_light && !human_runs_red) {
    // Brake to a stop before the line.
    const Scalar stop_x = junction_x - 2.0 * kLaneHalf - 2.0;
    const Scalar stop_target = stop_x - 2.5 - rng.uniform(0.3, 1.0);
    const Scalar dist = std::max(1.0, stop_target - ego_road.x);
    Scalar decel = v * v / (2.0 * dist);
    if (decel > 3.0) {
      v = std::sqrt(2.0 * 3.0 * dist);
      decel = 3.0;
      s.ego.speed = v;
    }
    Scalar x = ego_road.x, vv = v;
    for (int k = 1; k <= steps; ++k) {
      vv = std::max(0.0, vv - decel * dt);
      x = std::min(x + vv * dt, stop_target);
      human_road.push_back({x, ego_lat, 0.0});
    }
  } else {
    // Follow the lane at near-constant speed, mild weave.
    const Scalar accel = rng.uniform(-0.4, 0.4);
    const Scalar weave = rng.uniform(0.0, 0.12);
    const Scalar phase = rng.uniform(0.0, 2.0 * kPi);
    const std::vector<Scalar> speeds = speed_profile(v, accel, steps, dt);
    human_road = rollout_path(path, path.curvature == 0.0 ? ego_road.x : 0.0, ego_lat, speeds, dt);
    for (int k = 0; k < steps; ++k) {
      const Vec2 n = path.left_normal((k + 1) * v * dt);
      const Scalar w = weave * std::sin(phase + 0.8 * (k + 1));
      human_road[static_cast<std::size_t>(k)].x += w * n.x();
      human_road[static_cast<std::size_t>(k)].y += w * n.y();
    }
  }
  if (human_runs_red && kind == kJunction) {
    // Constant speed straight through the red light.
    human_road.clear();
    Scalar x = ego_road.x;
    for (int k = 1; k <= steps; ++k) {
      x += v * dt;
      human_road.push_back({x, ego_lat, 0.0});
    }
  }

  s.human_trajectory.dt = dt;
  for (const Pose2& p : human_road) {
    s.human_trajectory.poses.push_back(to_ego_frame(p, ego_road));
  }

  // Lead vehicle in the ego lane, spaced so the human never closes in.
  if (kind != kJunction && rng.bernoulli(0.65)) {
    const Scalar lead_speed = rng.uniform(0.4, 0.9) * v;
    const Scalar gap = rng.uniform(8.0, 14.0) + std::max(0.0, v - lead_speed) * (horizon + 1.0);
    s.agents.push_back(
        make_path_agent("lead0", path, ego_road.x + gap, ego_lat, lead_speed, steps, dt));
  }
  // Adjacent-lane traffic.
  if (kind != kJunction && second_lane && rng.bernoulli(0.5)) {
    if (oncoming_lane) {
      const Scalar start = rng.uniform(45.0, 70.0);
      const Scalar speed = rng.uniform(3.0, 8.0);
      Agent a;
      a.id = "oncoming0";
      a.width = kAgentWidth;
      a.length = kAgentLength;
      Scalar sd = start;
      for (int k = 0; k <= steps; ++k) {
        const Vec2 p = path.offset(sd, 2.0 * kLaneHalf);
        a.track.push_back({p.x(), p.y(), wrap_angle(path.heading(sd) + kPi)});
        sd -= speed * dt;
      }
      s.agents.push_back(std::move(a));
    } else {
      s.agents.push_back(make_path_agent("side0", path, rng.uniform(-5.0, 20.0),
                                         2.0 * kLaneHalf, rng.uniform(0.5, 1.1) * v, steps, dt));
    }
  }
  // Parked vehicle just off the right edge.
  if (rng.bernoulli(0.35)) {
    const Scalar along = rng.uniform(10.0, 35.0);
    const Vec2 p = path.offset(along, -kLaneHalf - 1.6);
    Agent parked;
    parked.id = "parked0";
    parked.width = kAgentWidth;
    parked.length = kAgentLength;
    parked.is_stationary = true;
    for (int k = 0; k <= steps; ++k) {
      parked.track.push_back({p.x(), p.y(), wrap_angle(path.heading(along))});
    }
    s.agents.push_back(std::move(parked));
  }

  if (tight_turn) s.tags.insert("sharp_turn_area");
  if (kind == kJunction && !red_light && rng.bernoulli(0.35)) s.tags.insert("unprotected_turn");

  // Previous planning cycle output: the human shifted one step, or a
  // constant-velocity straight plan.
  if (rng.bernoulli(0.55)) {
    Trajectory prev;
    prev.dt = dt;
    if (rng.bernoulli(0.6)) {
      prev.poses.push_back({rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.0});
      for (int k = 0; k + 1 < steps; ++k) {
        Pose2 p = s.human_trajectory.poses[static_cast<std::size_t>(k)];
        p.x += rng.uniform(-0.05, 0.05);
        p.y += rng.uniform(-0.05, 0.05);
        prev.poses.push_back(p);
      }
    } else {
      for (int k = 0; k < steps; ++k) prev.poses.push_back({v * dt * k, 0.0, 0.0});
    }
    scene::fill_yaw_from_positions(prev.poses);
    s.prev_plan = std::move(prev);
  }

  // Image-space detections, derived from the same geometry the camera sees.
  add_lane_detections(s, path, ego_lat, ego_road);
  add_obstacle_detections(s, ego_road);

  // Place the whole scenario in an arbitrary world frame.
  const Scalar world_yaw = rng.uniform(-kPi, kPi);
  const Vec2 world_t(rng.uniform(-150.0, 150.0), rng.uniform(-150.0, 150.0));
  return scene::transform_scenario(s, world_yaw, world_t);
}

void generate_dataset(const std::string& out_dir, int count, std::uint64_t seed,
                      const SyntheticParams& params) {
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    const Scenario s = generate_scenario(seed, i, params);
    scene::save_scenario(s, (std::filesystem::path(out_dir) / (s.id + ".json")).string());
  }
}

}  // namespace bevplan::cli
