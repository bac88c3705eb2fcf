#include "bevplan/scene/types.hpp"

#include <cmath>

namespace bevplan::scene {

void fill_yaw_from_positions(std::vector<Pose2>& poses) {
  Vec2 prev = Vec2::Zero();
  Scalar yaw = 0.0;
  for (Pose2& p : poses) {
    const Vec2 d = p.position() - prev;
    if (d.squaredNorm() > 0.0) yaw = std::atan2(d.y(), d.x());
    p.yaw = wrap_angle(yaw);
    prev = p.position();
  }
}

namespace {

Pose2 transform_pose(const Pose2& p, const Mat2& r, Scalar yaw, const Vec2& t) {
  const Vec2 q = r * p.position() + t;
  return Pose2{q.x(), q.y(), wrap_angle(p.yaw + yaw)};
}

}  // namespace

Scenario transform_scenario(const Scenario& s, Scalar yaw, const Vec2& t) {
  const Mat2 r = rotation2(yaw);
  Scenario out = s;
  out.ego.pose = transform_pose(s.ego.pose, r, yaw, t);
  for (Pose2& p : out.ego_history) p = transform_pose(p, r, yaw, t);
  for (Agent& a : out.agents) {
    for (Pose2& p : a.track) p = transform_pose(p, r, yaw, t);
  }
  for (Polygon& poly : out.drivable_area) {
    for (Vec2& v : poly) v = r * v + t;
  }
  for (Centerline& line : out.centerlines) {
    for (CenterlinePoint& cp : line) {
      const Vec2 q = r * Vec2(cp.x, cp.y) + t;
      cp.x = q.x();
      cp.y = q.y();
      cp.theta = wrap_angle(cp.theta + yaw);
    }
  }
  for (TrafficLight& tl : out.traffic_lights) {
    tl.stop_line_a = r * tl.stop_line_a + t;
    tl.stop_line_b = r * tl.stop_line_b + t;
  }
  for (Vec2& v : out.route) v = r * v + t;
  // human_trajectory, prev_plan, camera, detections2d are ego/image frame.
  return out;
}

}  // namespace bevplan::scene
