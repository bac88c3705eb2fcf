// Independent re-simulation of the nine sub-metrics: a single step-by-step
// walk with its own geometry helpers, kept deliberately separate from the
// library implementation. Shared elementary formulas (pose composition,
// finite differences, arc-length projection) keep the exact arithmetic
// shapes so agreement can be asserted bit-for-bit.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bevplan/epdms/metrics.hpp"
#include "bevplan/scene/types.hpp"

namespace testutil {

namespace oracle_detail {

using bevplan::Scalar;
using bevplan::scene::Pose2;

struct Rect {
  double cx, cy, yaw, width, length;
};

inline void rect_corners(const Rect& r, double xs[4], double ys[4]) {
  const double c = std::cos(r.yaw), s = std::sin(r.yaw);
  const double hl = 0.5 * r.length, hw = 0.5 * r.width;
  const double lx[4] = {hl, -hl, -hl, hl};
  const double ly[4] = {hw, hw, -hw, -hw};
  for (int i = 0; i < 4; ++i) {
    xs[i] = r.cx + c * lx[i] - s * ly[i];
    ys[i] = r.cy + s * lx[i] + c * ly[i];
  }
}

// Analytic OBB-OBB separating-axis test on centers, headings and extents.
inline bool rects_overlap(const Rect& a, const Rect& b) {
  const double axes[4][2] = {{std::cos(a.yaw), std::sin(a.yaw)},
                             {-std::sin(a.yaw), std::cos(a.yaw)},
                             {std::cos(b.yaw), std::sin(b.yaw)},
                             {-std::sin(b.yaw), std::cos(b.yaw)}};
  const double half_a[2] = {0.5 * a.length, 0.5 * a.width};
  const double half_b[2] = {0.5 * b.length, 0.5 * b.width};
  const double dx = b.cx - a.cx, dy = b.cy - a.cy;
  for (int i = 0; i < 4; ++i) {
    const double ux = axes[i][0], uy = axes[i][1];
    const double dist = std::abs(ux * dx + uy * dy);
    double ra = 0.0, rb = 0.0;
    for (int k = 0; k < 2; ++k) {
      ra += half_a[k] * std::abs(ux * axes[k][0] + uy * axes[k][1]);
      rb += half_b[k] * std::abs(ux * axes[2 + k][0] + uy * axes[2 + k][1]);
    }
    if (dist > ra + rb) return false;
  }
  return true;
}

inline bool on_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double abx = bx - ax, aby = by - ay;
  const double apx = px - ax, apy = py - ay;
  if (abx * apy - aby * apx != 0.0) return false;
  const double t = abx * apx + aby * apy;
  return t >= 0.0 && t <= abx * abx + aby * aby;
}

// Winding-number containment (integer signed crossings), boundary inclusive.
inline bool point_in_poly(double px, double py, const std::vector<bevplan::Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(px, py, poly[j].x(), poly[j].y(), poly[i].x(), poly[i].y())) return true;
  }
  int winding = 0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double ax = poly[j].x(), ay = poly[j].y();
    const double bx = poly[i].x(), by = poly[i].y();
    if (ay <= py) {
      if (by > py && (bx - ax) * (py - ay) - (by - ay) * (px - ax) > 0.0) ++winding;
    } else {
      if (by <= py && (bx - ax) * (py - ay) - (by - ay) * (px - ax) < 0.0) --winding;
    }
  }
  return winding != 0;
}

inline double seg_distance(double px, double py, double ax, double ay, double bx,
                           double by) {
  const double abx = bx - ax, aby = by - ay;
  const double len2 = abx * abx + aby * aby;
  if (len2 == 0.0) {
    const double dx = px - ax, dy = py - ay;
    return std::sqrt(dx * dx + dy * dy);
  }
  const double t = std::clamp((abx * (px - ax) + aby * (py - ay)) / len2, 0.0, 1.0);
  const double qx = ax + t * abx, qy = ay + t * aby;
  const double dx = px - qx, dy = py - qy;
  return std::sqrt(dx * dx + dy * dy);
}

inline bool segments_cross(double ax, double ay, double bx, double by, double cx,
                           double cy, double dx, double dy) {
  const auto side = [](double ox, double oy, double px, double py, double qx, double qy) {
    const double v = (px - ox) * (qy - oy) - (py - oy) * (qx - ox);
    return (v > 0.0) - (v < 0.0);
  };
  const int s1 = side(ax, ay, bx, by, cx, cy), s2 = side(ax, ay, bx, by, dx, dy);
  const int s3 = side(cx, cy, dx, dy, ax, ay), s4 = side(cx, cy, dx, dy, bx, by);
  if (s1 != s2 && s3 != s4) return true;
  if (s1 == 0 && on_segment(cx, cy, ax, ay, bx, by)) return true;
  if (s2 == 0 && on_segment(dx, dy, ax, ay, bx, by)) return true;
  if (s3 == 0 && on_segment(ax, ay, cx, cy, dx, dy)) return true;
  if (s4 == 0 && on_segment(bx, by, cx, cy, dx, dy)) return true;
  return false;
}

struct LaneHit {
  double dist;
  double theta;
  bool found;
};

inline LaneHit nearest_lane(double px, double py,
                            const std::vector<bevplan::scene::Centerline>& lines) {
  LaneHit hit{0.0, 0.0, false};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : lines) {
    if (line.empty()) continue;
    if (line.size() == 1) {
      const double dx = px - line[0].x, dy = py - line[0].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < best) {
        best = d;
        hit = {d, line[0].theta, true};
      }
      continue;
    }
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const double d =
          seg_distance(px, py, line[i].x, line[i].y, line[i + 1].x, line[i + 1].y);
      if (d < best) {
        best = d;
        hit = {d, line[i].theta, true};
      }
    }
  }
  return hit;
}

inline double route_arclength(double px, double py,
                              const std::vector<bevplan::Vec2>& route) {
  if (route.size() < 2) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0, prefix = 0.0;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const double ax = route[i].x(), ay = route[i].y();
    const double bx = route[i + 1].x(), by = route[i + 1].y();
    const double abx = bx - ax, aby = by - ay;
    const double len2 = abx * abx + aby * aby;
    const double seg_len = std::sqrt(len2);
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp((abx * (px - ax) + aby * (py - ay)) / len2, 0.0, 1.0);
    const double qx = ax + t * abx, qy = ay + t * aby;
    const double dex = px - qx, dey = py - qy;
    const double d = std::sqrt(dex * dex + dey * dey);
    if (d < best) {
      best = d;
      best_s = prefix + t * seg_len;
    }
    prefix += seg_len;
  }
  return best_s;
}

inline double wrap(double a) {
  double r = std::remainder(a, 2.0 * 3.14159265358979323846);
  if (r <= -3.14159265358979323846) r += 2.0 * 3.14159265358979323846;
  return r;
}

}  // namespace oracle_detail

// Step-by-step re-simulation of every sub-metric in one walk.
inline bevplan::epdms::SubMetrics oracle_submetrics(
    const bevplan::scene::Scenario& s, const bevplan::scene::Trajectory& traj,
    const bevplan::epdms::Thresholds& thr = {}) {
  namespace od = oracle_detail;
  using bevplan::scene::Pose2;
  const int steps = traj.steps();
  const double dt = traj.dt;

  // World-frame pose chain w_0..w_T.
  std::vector<Pose2> w(static_cast<std::size_t>(steps) + 1);
  w[0] = s.ego.pose;
  const double c0 = std::cos(s.ego.pose.yaw), s0 = std::sin(s.ego.pose.yaw);
  for (int k = 1; k <= steps; ++k) {
    const Pose2& local = traj.poses[static_cast<std::size_t>(k - 1)];
    w[static_cast<std::size_t>(k)].x = s.ego.pose.x + c0 * local.x - s0 * local.y;
    w[static_cast<std::size_t>(k)].y = s.ego.pose.y + s0 * local.x + c0 * local.y;
    w[static_cast<std::size_t>(k)].yaw = od::wrap(s.ego.pose.yaw + local.yaw);
  }

  bool collision_at_fault = false;
  bool off_drivable = false;
  double backward_total = 0.0;
  bool crossed_red = false;
  bool ttc_hit = false;
  int lane_kept = 0;

  const int ttc_substeps = static_cast<int>(std::lround(thr.ttc_horizon / thr.ttc_step));

  for (int k = 1; k <= steps; ++k) {
    const Pose2& pose = w[static_cast<std::size_t>(k)];
    const Pose2& prev = w[static_cast<std::size_t>(k - 1)];
    const double vx = (pose.x - prev.x) / dt, vy = (pose.y - prev.y) / dt;
    const double speed = std::sqrt(vx * vx + vy * vy);
    const od::Rect ego_rect{pose.x, pose.y, pose.yaw, s.ego.width, s.ego.length};

    // Collisions and the rear-end exemption.
    for (const bevplan::scene::Agent& agent : s.agents) {
      const Pose2& ap = agent.track[static_cast<std::size_t>(k)];
      const od::Rect agent_rect{ap.x, ap.y, ap.yaw, agent.width, agent.length};
      if (!od::rects_overlap(ego_rect, agent_rect)) continue;
      const double hx = std::cos(pose.yaw), hy = std::sin(pose.yaw);
      const double rear_x = pose.x - 0.5 * s.ego.length * hx;
      const double rear_y = pose.y - 0.5 * s.ego.length * hy;
      const bool behind = (ap.x - rear_x) * hx + (ap.y - rear_y) * hy < 0.0;
      if (!(speed < thr.stationary_speed && behind)) collision_at_fault = true;
    }

    // All four footprint corners inside the drivable union.
    double xs[4], ys[4];
    od::rect_corners(ego_rect, xs, ys);
    for (int i = 0; i < 4 && !off_drivable; ++i) {
      bool inside = false;
      for (const auto& poly : s.drivable_area) {
        if (od::point_in_poly(xs[i], ys[i], poly)) {
          inside = true;
          break;
        }
      }
      if (!inside) off_drivable = true;
    }

    // Motion against the lane direction, accumulated.
    const od::LaneHit lane_prev = od::nearest_lane(prev.x, prev.y, s.centerlines);
    if (lane_prev.found) {
      const double along = (pose.x - prev.x) * std::cos(lane_prev.theta) +
                           (pose.y - prev.y) * std::sin(lane_prev.theta);
      if (-along > 0.0) backward_total += -along;
    }

    // Red stop lines against the footprint (corner containment or edge cross).
    for (const auto& light : s.traffic_lights) {
      if (light.state != bevplan::scene::LightState::kRed || crossed_red) continue;
      const double lax = light.stop_line_a.x(), lay = light.stop_line_a.y();
      const double lbx = light.stop_line_b.x(), lby = light.stop_line_b.y();
      std::vector<bevplan::Vec2> quad = {{xs[0], ys[0]}, {xs[1], ys[1]},
                                         {xs[2], ys[2]}, {xs[3], ys[3]}};
      bool hits = od::point_in_poly(lax, lay, quad) || od::point_in_poly(lbx, lby, quad);
      for (int i = 0; i < 4 && !hits; ++i) {
        const int j = (i + 1) % 4;
        hits = od::segments_cross(xs[i], ys[i], xs[j], ys[j], lax, lay, lbx, lby);
      }
      if (hits) crossed_red = true;
    }

    // Constant-velocity projections for time-to-collision.
    if (speed >= thr.stationary_speed) {
      for (const bevplan::scene::Agent& agent : s.agents) {
        if (ttc_hit) break;
        const Pose2& ap = agent.track[static_cast<std::size_t>(k)];
        const Pose2& ap_prev = agent.track[static_cast<std::size_t>(k - 1)];
        const double avx = (ap.x - ap_prev.x) / dt, avy = (ap.y - ap_prev.y) / dt;
        for (int m = 1; m <= ttc_substeps && !ttc_hit; ++m) {
          const double t = m * thr.ttc_step;
          const od::Rect ego_proj{pose.x + vx * t, pose.y + vy * t, pose.yaw, s.ego.width,
                                  s.ego.length};
          const od::Rect agent_proj{ap.x + avx * t, ap.y + avy * t, ap.yaw, agent.width,
                                    agent.length};
          if (od::rects_overlap(ego_proj, agent_proj)) ttc_hit = true;
        }
      }
    }

    // Lane keeping.
    if (!s.centerlines.empty()) {
      const od::LaneHit lane = od::nearest_lane(pose.x, pose.y, s.centerlines);
      if (lane.dist <= thr.lk_max_lateral) ++lane_kept;
    }
  }

  // Ego progress along the route against the human reference.
  double ep;
  {
    const double start_s = od::route_arclength(w[0].x, w[0].y, s.route);
    const double end_s = od::route_arclength(w[static_cast<std::size_t>(steps)].x,
                                             w[static_cast<std::size_t>(steps)].y, s.route);
    const Pose2& human_last = s.human_trajectory.poses.back();
    const double hx = s.ego.pose.x + c0 * human_last.x - s0 * human_last.y;
    const double hy = s.ego.pose.y + s0 * human_last.x + c0 * human_last.y;
    const double human_prog = od::route_arclength(hx, hy, s.route) - start_s;
    if (human_prog < thr.ep_negligible) {
      ep = 1.0;
    } else {
      ep = std::clamp((end_s - start_s) / std::max(human_prog, thr.ep_min_reference), 0.0,
                      1.0);
    }
  }

  // History comfort over [last two history poses | rollout].
  bool uncomfortable = false;
  {
    std::vector<Pose2> chain;
    const std::size_t nh = s.ego_history.size();
    for (std::size_t i = (nh >= 2 ? nh - 2 : 0); i < nh; ++i) chain.push_back(s.ego_history[i]);
    while (chain.size() < 2) chain.insert(chain.begin(), w[0]);
    for (const Pose2& p : w) chain.push_back(p);
    const std::size_t n = chain.size();
    std::vector<double> velx(n - 1), vely(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      velx[i] = (chain[i + 1].x - chain[i].x) / dt;
      vely[i] = (chain[i + 1].y - chain[i].y) / dt;
    }
    std::vector<double> accx(n - 2), accy(n - 2);
    for (std::size_t i = 0; i + 2 < n; ++i) {
      accx[i] = (velx[i + 1] - velx[i]) / dt;
      accy[i] = (vely[i + 1] - vely[i]) / dt;
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
      const double hxv = std::cos(chain[i + 2].yaw), hyv = std::sin(chain[i + 2].yaw);
      const double lon = accx[i] * hxv + accy[i] * hyv;
      const double lat = accx[i] * -hyv + accy[i] * hxv;
      if (std::abs(lon) > thr.hc_max_lon_accel || std::abs(lat) > thr.hc_max_lat_accel) {
        uncomfortable = true;
      }
    }
    for (std::size_t i = 0; i + 3 < n; ++i) {
      const double jx = (accx[i + 1] - accx[i]) / dt;
      const double jy = (accy[i + 1] - accy[i]) / dt;
      if (std::sqrt(jx * jx + jy * jy) > thr.hc_max_jerk) uncomfortable = true;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(od::wrap(chain[i + 1].yaw - chain[i].yaw)) / dt > thr.hc_max_yaw_rate) {
        uncomfortable = true;
      }
    }
  }

  // Extended comfort against the previous plan, one-step aligned.
  bool jarring = false;
  if (s.prev_plan) {
    std::vector<double> px, py;
    for (const Pose2& p : s.prev_plan->poses) {
      px.push_back(s.ego.pose.x + c0 * p.x - s0 * p.y);
      py.push_back(s.ego.pose.y + s0 * p.x + c0 * p.y);
    }
    for (std::size_t k = 1; k + 1 < px.size() && k + 1 < w.size(); ++k) {
      const double ax = (w[k + 1].x - 2.0 * w[k].x + w[k - 1].x) / (dt * dt) -
                        (px[k + 1] - 2.0 * px[k] + px[k - 1]) / (dt * dt);
      const double ay = (w[k + 1].y - 2.0 * w[k].y + w[k - 1].y) / (dt * dt) -
                        (py[k + 1] - 2.0 * py[k] + py[k - 1]) / (dt * dt);
      if (std::sqrt(ax * ax + ay * ay) > thr.ec_max_accel_diff) jarring = true;
    }
  }

  bevplan::epdms::SubMetrics m;
  m.nc = collision_at_fault ? 0.0 : 1.0;
  m.dac = off_drivable ? 0.0 : 1.0;
  m.ddc = backward_total < thr.ddc_minor ? 1.0 : (backward_total < thr.ddc_major ? 0.5 : 0.0);
  m.tlc = crossed_red ? 0.0 : 1.0;
  m.ttc = ttc_hit ? 0.0 : 1.0;
  m.ep = ep;
  m.hc = uncomfortable ? 0.0 : 1.0;
  m.lk = s.centerlines.empty() ? 1.0
                               : static_cast<double>(lane_kept) / static_cast<double>(steps);
  m.ec = jarring ? 0.0 : 1.0;
  return m;
}

// Hand-written reference for the filter and aggregation formulas.
inline double oracle_epdms(const bevplan::epdms::SubMetrics& agent,
                           const bevplan::epdms::SubMetrics& human,
                           const bevplan::epdms::MetricWeights& weights) {
  const double mult_agent[4] = {agent.nc, agent.dac, agent.ddc, agent.tlc};
  const double mult_human[4] = {human.nc, human.dac, human.ddc, human.tlc};
  const double avg_agent[5] = {agent.ttc, agent.ep, agent.hc, agent.lk, agent.ec};
  const double avg_human[5] = {human.ttc, human.ep, human.hc, human.lk, human.ec};
  const double w[5] = {weights.ttc, weights.ep, weights.hc, weights.lk, weights.ec};
  double product = 1.0;
  for (int i = 0; i < 4; ++i) {
    product *= mult_human[i] == 0.0 ? 1.0 : mult_agent[i];
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 5; ++i) {
    num += w[i] * (avg_human[i] == 0.0 ? 1.0 : avg_agent[i]);
    den += w[i];
  }
  return product * (num / den);
}

}  // namespace testutil
