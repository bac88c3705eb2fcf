// Domain types for scenarios and trajectories. All values are immutable
// after construction; operations over them are pure functions.
//
// Frames: trajectories (human, candidates, prev_plan) are in the current
// ego frame (x forward, y left, ego at origin). Everything else (agents,
// polygons, centerlines, route, stop lines) is in the scenario world frame.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bevplan/types.hpp"

namespace bevplan::scene {

struct Pose2 {
  Scalar x = 0.0;
  Scalar y = 0.0;
  Scalar yaw = 0.0;  // radians, normalized to (-pi, pi]

  Vec2 position() const { return Vec2(x, y); }
};

struct Trajectory {
  std::vector<Pose2> poses;  // T future poses, 2 Hz
  Scalar dt = 0.5;           // seconds

  int steps() const { return static_cast<int>(poses.size()); }
  Vec2 position(int i) const { return poses[static_cast<std::size_t>(i)].position(); }
};

struct EgoState {
  Pose2 pose;
  Scalar speed = 0.0;  // m/s, >= 0
  Scalar accel = 0.0;  // m/s^2
  Scalar width = 2.0;  // m, > 0
  Scalar length = 4.5; // m, > 0
};

struct Agent {
  std::string id;
  Scalar width = 2.0;
  Scalar length = 4.5;
  std::vector<Pose2> track;  // length T+1, index 0 = current pose
  bool is_stationary = false;
};

// One polyline vertex of a lane centerline with its direction angle.
struct CenterlinePoint {
  Scalar x = 0.0;
  Scalar y = 0.0;
  Scalar theta = 0.0;
};

using Centerline = std::vector<CenterlinePoint>;
using Polygon = std::vector<Vec2>;   // simple, CCW
using Polyline = std::vector<Vec2>;

enum class LightState { kRed, kGreen };

struct TrafficLight {
  Vec2 stop_line_a = Vec2::Zero();
  Vec2 stop_line_b = Vec2::Zero();
  LightState state = LightState::kGreen;
};

struct CameraModel {
  Scalar fx = 0.0, fy = 0.0;  // pixels, > 0
  Scalar cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();  // ego -> camera
  Vec3 translation = Vec3::Zero();
};

struct ImageBox {
  Scalar u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
};

struct Detections2D {
  std::vector<std::vector<Vec2>> lane_lines;  // image-space polylines
  std::vector<ImageBox> obstacles;            // axis-aligned image boxes
};

struct Scenario {
  std::string id;  // filename stem, set by the loader
  EgoState ego;
  std::vector<Pose2> ego_history;  // past poses, dt-spaced, oldest first
  std::vector<Agent> agents;
  std::vector<Polygon> drivable_area;
  std::vector<Centerline> centerlines;
  std::vector<TrafficLight> traffic_lights;
  Polyline route;
  Trajectory human_trajectory;
  std::optional<Trajectory> prev_plan;
  CameraModel camera;
  Detections2D detections2d;
  std::set<std::string> tags;

  int horizon_steps() const { return human_trajectory.steps(); }
};

// Pose of a trajectory step in the world frame: ego.pose composed with the
// ego-frame pose.
inline Pose2 compose(const Pose2& base, const Pose2& local) {
  const Scalar c = std::cos(base.yaw), s = std::sin(base.yaw);
  Pose2 out;
  out.x = base.x + c * local.x - s * local.y;
  out.y = base.y + s * local.x + c * local.y;
  out.yaw = wrap_angle(base.yaw + local.yaw);
  return out;
}

// Fills yaw for a sequence of ego-frame positions by finite differences,
// treating the origin as the implicit previous point of the first pose.
// Zero-displacement steps keep the preceding yaw.
void fill_yaw_from_positions(std::vector<Pose2>& poses);

// Applies a rigid transform (rotation by yaw, then translation) to every
// world-frame entity of the scenario. Ego-frame trajectories are unchanged.
Scenario transform_scenario(const Scenario& s, Scalar yaw, const Vec2& t);

}  // namespace bevplan::scene
