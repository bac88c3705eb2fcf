#include "bevplan/bev/render.hpp"

#include <algorithm>
#include <cmath>

#include "bevplan/scene/geometry.hpp"

namespace bevplan::bev {

using scene::Pose2;

BevGrid render_bev(const scene::Scenario& s, const RenderParams& params) {
  BevGrid grid = BevGrid::zeros(params.spec);
  const int n = params.spec.cells;
  const Scalar ego_yaw = s.ego.pose.yaw;
  const Mat2 r_world = rotation2(ego_yaw);  // ego -> world
  const Vec2 ego_pos = s.ego.pose.position();

  // World-frame entities transformed into the ego frame once.
  std::vector<scene::Polygon> drivable;
  drivable.reserve(s.drivable_area.size());
  const Mat2 r_ego = r_world.transpose();
  for (const scene::Polygon& poly : s.drivable_area) {
    scene::Polygon p;
    p.reserve(poly.size());
    for (const Vec2& v : poly) p.push_back(r_ego * (v - ego_pos));
    drivable.push_back(std::move(p));
  }
  std::vector<scene::Centerline> centerlines;
  centerlines.reserve(s.centerlines.size());
  for (const scene::Centerline& line : s.centerlines) {
    scene::Centerline cl;
    cl.reserve(line.size());
    for (const scene::CenterlinePoint& cp : line) {
      const Vec2 q = r_ego * (Vec2(cp.x, cp.y) - ego_pos);
      cl.push_back({q.x(), q.y(), wrap_angle(cp.theta - ego_yaw)});
    }
    centerlines.push_back(std::move(cl));
  }

  // Agent footprints, current and future, in the ego frame.
  std::vector<scene::Obb> now_boxes;
  std::vector<scene::Obb> future_boxes;
  for (const scene::Agent& a : s.agents) {
    for (std::size_t k = 0; k < a.track.size(); ++k) {
      const Pose2& wp = a.track[k];
      const Vec2 q = r_ego * (wp.position() - ego_pos);
      const Pose2 local{q.x(), q.y(), wrap_angle(wp.yaw - ego_yaw)};
      const scene::Obb box = scene::ego_footprint(local, a.width, a.length);
      if (k == 0) {
        now_boxes.push_back(box);
      } else {
        future_boxes.push_back(box);
      }
    }
  }

  std::vector<std::pair<Vec2, Vec2>> red_lines;
  for (const scene::TrafficLight& tl : s.traffic_lights) {
    if (tl.state == scene::LightState::kRed) {
      red_lines.emplace_back(r_ego * (tl.stop_line_a - ego_pos),
                             r_ego * (tl.stop_line_b - ego_pos));
    }
  }

  const Scalar clamp_m = params.distance_clamp;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 c(params.spec.center(i), params.spec.center(j));

      const bool inside = scene::point_in_drivable(c, drivable);
      grid.channels[kDrivableMask](i, j) = inside ? 1.0 : 0.0;

      const Scalar sd = scene::signed_distance_to_drivable_boundary(c, drivable);
      grid.channels[kBoundaryDistance](i, j) = std::clamp(sd, -clamp_m, clamp_m) / clamp_m;

      const scene::CenterlineQuery q = scene::nearest_centerline(c, centerlines);
      if (q.valid) {
        grid.channels[kCenterlineDistance](i, j) = std::min(q.distance, clamp_m) / clamp_m;
        grid.channels[kLaneCos](i, j) = std::cos(q.theta);
        grid.channels[kLaneSin](i, j) = std::sin(q.theta);
      } else {
        grid.channels[kCenterlineDistance](i, j) = 1.0;
      }

      for (const scene::Obb& box : now_boxes) {
        if (scene::point_in_convex(c, box)) {
          grid.channels[kOccupancyNow](i, j) = 1.0;
          break;
        }
      }
      for (const scene::Obb& box : future_boxes) {
        if (scene::point_in_convex(c, box)) {
          grid.channels[kOccupancyFuture](i, j) = 1.0;
          break;
        }
      }

      for (const auto& [a, b] : red_lines) {
        if (scene::distance_point_segment(c, a, b) <= params.stop_line_halfwidth) {
          grid.channels[kRedStopLine](i, j) = 1.0;
          break;
        }
      }
    }
  }
  return grid;
}

}  // namespace bevplan::bev
