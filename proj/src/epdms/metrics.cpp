#include "bevplan/epdms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "bevplan/scene/geometry.hpp"

namespace bevplan::epdms {

using scene::Obb;
using scene::Pose2;
using scene::Scenario;
using scene::Trajectory;

namespace {

// Shared rollout state: world-frame ego poses w_0..w_T (w_0 = current pose)
// and per-step velocity vectors v_k = (p_k - p_{k-1}) / dt.
struct Rollout {
  std::vector<Pose2> poses;
  std::vector<Vec2> velocity;  // velocity[k] belongs to the step into poses[k]
  Scalar dt = 0.5;
};

Rollout roll(const Scenario& s, const Trajectory& traj) {
  Rollout r;
  r.dt = traj.dt;
  r.poses.push_back(s.ego.pose);
  for (const Pose2& p : traj.poses) r.poses.push_back(scene::compose(s.ego.pose, p));
  r.velocity.assign(r.poses.size(), Vec2::Zero());
  for (std::size_t k = 1; k < r.poses.size(); ++k) {
    r.velocity[k] = (r.poses[k].position() - r.poses[k - 1].position()) / r.dt;
  }
  return r;
}

Vec2 heading(const Pose2& p) { return Vec2(std::cos(p.yaw), std::sin(p.yaw)); }

Scalar no_at_fault_collisions(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  const int steps = static_cast<int>(r.poses.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    const Pose2& ego_pose = r.poses[static_cast<std::size_t>(k)];
    const Obb ego_box = scene::ego_footprint(ego_pose, s.ego.width, s.ego.length);
    const Scalar speed = r.velocity[static_cast<std::size_t>(k)].norm();
    for (const scene::Agent& a : s.agents) {
      const Pose2& ap = a.track[static_cast<std::size_t>(k)];
      if (!scene::obb_intersects(ego_box, scene::ego_footprint(ap, a.width, a.length))) {
        continue;
      }
      // Rear-end exemption: stopped ego hit from behind is not at fault.
      const Vec2 rear = ego_pose.position() - 0.5 * s.ego.length * heading(ego_pose);
      const bool agent_behind = (ap.position() - rear).dot(heading(ego_pose)) < 0.0;
      if (!(speed < thr.stationary_speed && agent_behind)) return 0.0;
    }
  }
  return 1.0;
}

Scalar drivable_area_compliance(const Scenario& s, const Rollout& r) {
  const int steps = static_cast<int>(r.poses.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    const Obb box =
        scene::ego_footprint(r.poses[static_cast<std::size_t>(k)], s.ego.width, s.ego.length);
    for (const Vec2& corner : box) {
      if (!scene::point_in_drivable(corner, s.drivable_area)) return 0.0;
    }
  }
  return 1.0;
}

Scalar driving_direction_compliance(const Scenario& s, const Rollout& r,
                                    const Thresholds& thr) {
  Scalar backward = 0.0;
  const int steps = static_cast<int>(r.poses.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    const Vec2 delta = r.poses[static_cast<std::size_t>(k)].position() -
                       r.poses[static_cast<std::size_t>(k - 1)].position();
    const scene::CenterlineQuery q = scene::nearest_centerline(
        r.poses[static_cast<std::size_t>(k - 1)].position(), s.centerlines);
    if (!q.valid) continue;
    const Scalar along = delta.dot(Vec2(std::cos(q.theta), std::sin(q.theta)));
    backward += std::max(0.0, -along);
  }
  if (backward < thr.ddc_minor) return 1.0;
  if (backward < thr.ddc_major) return 0.5;
  return 0.0;
}

Scalar traffic_light_compliance(const Scenario& s, const Rollout& r) {
  const int steps = static_cast<int>(r.poses.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    const Obb box =
        scene::ego_footprint(r.poses[static_cast<std::size_t>(k)], s.ego.width, s.ego.length);
    for (const scene::TrafficLight& tl : s.traffic_lights) {
      if (tl.state != scene::LightState::kRed) continue;
      if (scene::segment_intersects_obb(tl.stop_line_a, tl.stop_line_b, box)) return 0.0;
    }
  }
  return 1.0;
}

Scalar ego_progress(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  const Scalar s0 = scene::arclength_projection(r.poses.front().position(), s.route);
  const Scalar s_end = scene::arclength_projection(r.poses.back().position(), s.route);
  const Pose2 human_end =
      scene::compose(s.ego.pose, s.human_trajectory.poses.back());
  const Scalar s_human = scene::arclength_projection(human_end.position(), s.route);
  const Scalar human_prog = s_human - s0;
  if (human_prog < thr.ep_negligible) return 1.0;
  const Scalar ratio = (s_end - s0) / std::max(human_prog, thr.ep_min_reference);
  return std::clamp(ratio, 0.0, 1.0);
}

Scalar time_to_collision(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  const int steps = static_cast<int>(r.poses.size()) - 1;
  const int substeps = static_cast<int>(std::lround(thr.ttc_horizon / thr.ttc_step));
  for (int k = 1; k <= steps; ++k) {
    const Vec2 ego_vel = r.velocity[static_cast<std::size_t>(k)];
    if (ego_vel.norm() < thr.stationary_speed) continue;  // only while ego moves
    const Pose2& ego_pose = r.poses[static_cast<std::size_t>(k)];
    for (const scene::Agent& a : s.agents) {
      const Pose2& ap = a.track[static_cast<std::size_t>(k)];
      const Vec2 agent_vel =
          (ap.position() - a.track[static_cast<std::size_t>(k - 1)].position()) / r.dt;
      for (int m = 1; m <= substeps; ++m) {
        const Scalar t = m * thr.ttc_step;
        Pose2 ego_proj = ego_pose;
        ego_proj.x += ego_vel.x() * t;
        ego_proj.y += ego_vel.y() * t;
        Pose2 agent_proj = ap;
        agent_proj.x += agent_vel.x() * t;
        agent_proj.y += agent_vel.y() * t;
        if (scene::obb_intersects(scene::ego_footprint(ego_proj, s.ego.width, s.ego.length),
                                  scene::ego_footprint(agent_proj, a.width, a.length))) {
          return 0.0;
        }
      }
    }
  }
  return 1.0;
}

Scalar history_comfort(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  // Pose chain: last two history poses (padded with the current pose when
  // missing), then the rollout.
  std::vector<Pose2> chain;
  const std::size_t nh = s.ego_history.size();
  for (std::size_t i = (nh >= 2 ? nh - 2 : 0); i < nh; ++i) chain.push_back(s.ego_history[i]);
  while (chain.size() < 2) chain.insert(chain.begin(), r.poses.front());
  chain.insert(chain.end(), r.poses.begin(), r.poses.end());

  const Scalar dt = r.dt;
  const std::size_t n = chain.size();
  std::vector<Vec2> vel(n - 1), acc(n - 2), jerk(n - 3);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    vel[i] = (chain[i + 1].position() - chain[i].position()) / dt;
  }
  for (std::size_t i = 0; i + 2 < n; ++i) acc[i] = (vel[i + 1] - vel[i]) / dt;
  for (std::size_t i = 0; i + 3 < n; ++i) jerk[i] = (acc[i + 1] - acc[i]) / dt;

  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Vec2 h = heading(chain[i + 2]);
    const Scalar lon = acc[i].dot(h);
    const Scalar lat = acc[i].dot(Vec2(-h.y(), h.x()));
    if (std::abs(lon) > thr.hc_max_lon_accel || std::abs(lat) > thr.hc_max_lat_accel) {
      return 0.0;
    }
  }
  for (const Vec2& j : jerk) {
    if (j.norm() > thr.hc_max_jerk) return 0.0;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(wrap_angle(chain[i + 1].yaw - chain[i].yaw)) / dt > thr.hc_max_yaw_rate) {
      return 0.0;
    }
  }
  return 1.0;
}

Scalar extended_comfort(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  if (!s.prev_plan) return 1.0;
  // The previous plan is one step older: prev pose j aligns with time j*dt,
  // i.e. with rollout pose j. Compare accelerations where both are defined.
  const Trajectory& prev = *s.prev_plan;
  std::vector<Vec2> prev_pos;
  prev_pos.reserve(prev.poses.size());
  for (const Pose2& p : prev.poses) {
    prev_pos.push_back(scene::compose(s.ego.pose, p).position());
  }
  const Scalar dt = r.dt;
  const auto accel_at = [&](const std::vector<Vec2>& pos, std::size_t k) {
    return (pos[k + 1] - 2.0 * pos[k] + pos[k - 1]) / (dt * dt);
  };
  std::vector<Vec2> roll_pos;
  roll_pos.reserve(r.poses.size());
  for (const Pose2& p : r.poses) roll_pos.push_back(p.position());

  for (std::size_t k = 1; k + 1 < prev_pos.size() && k + 1 < roll_pos.size(); ++k) {
    const Vec2 diff = accel_at(roll_pos, k) - accel_at(prev_pos, k);
    if (diff.norm() > thr.ec_max_accel_diff) return 0.0;
  }
  return 1.0;
}

Scalar lane_keeping(const Scenario& s, const Rollout& r, const Thresholds& thr) {
  if (s.centerlines.empty()) return 1.0;
  const int steps = static_cast<int>(r.poses.size()) - 1;
  int kept = 0;
  for (int k = 1; k <= steps; ++k) {
    const scene::CenterlineQuery q = scene::nearest_centerline(
        r.poses[static_cast<std::size_t>(k)].position(), s.centerlines);
    if (q.distance <= thr.lk_max_lateral) ++kept;
  }
  return static_cast<Scalar>(kept) / static_cast<Scalar>(steps);
}

}  // namespace

SubMetrics eval_submetrics(const Scenario& s, const Trajectory& traj,
                           const Thresholds& thr) {
  const Rollout r = roll(s, traj);
  SubMetrics m;
  m.nc = no_at_fault_collisions(s, r, thr);
  m.dac = drivable_area_compliance(s, r);
  m.ddc = driving_direction_compliance(s, r, thr);
  m.tlc = traffic_light_compliance(s, r);
  m.ttc = time_to_collision(s, r, thr);
  m.ep = ego_progress(s, r, thr);
  m.hc = history_comfort(s, r, thr);
  m.lk = lane_keeping(s, r, thr);
  m.ec = extended_comfort(s, r, thr);
  return m;
}

Scalar aggregate_epdms(const SubMetrics& agent, const SubMetrics& human,
                       const MetricWeights& w) {
  const Scalar weight_sum = w.ttc + w.ep + w.hc + w.lk + w.ec;
  if (!(weight_sum > 0.0)) throw std::invalid_argument("aggregate_epdms: weight sum must be > 0");
  const Scalar mult = filter_metric(agent.nc, human.nc) * filter_metric(agent.dac, human.dac) *
                      filter_metric(agent.ddc, human.ddc) * filter_metric(agent.tlc, human.tlc);
  const Scalar weighted = w.ttc * filter_metric(agent.ttc, human.ttc) +
                          w.ep * filter_metric(agent.ep, human.ep) +
                          w.hc * filter_metric(agent.hc, human.hc) +
                          w.lk * filter_metric(agent.lk, human.lk) +
                          w.ec * filter_metric(agent.ec, human.ec);
  return mult * (weighted / weight_sum);
}

MetricReport evaluate(const Scenario& s, const Trajectory& traj, const MetricWeights& w,
                      const Thresholds& thr) {
  MetricReport report;
  report.agent = eval_submetrics(s, traj, thr);
  report.human = eval_submetrics(s, s.human_trajectory, thr);
  const SubMetrics& a = report.agent;
  const SubMetrics& h = report.human;
  report.filtered.nc = filter_metric(a.nc, h.nc);
  report.filtered.dac = filter_metric(a.dac, h.dac);
  report.filtered.ddc = filter_metric(a.ddc, h.ddc);
  report.filtered.tlc = filter_metric(a.tlc, h.tlc);
  report.filtered.ttc = filter_metric(a.ttc, h.ttc);
  report.filtered.ep = filter_metric(a.ep, h.ep);
  report.filtered.hc = filter_metric(a.hc, h.hc);
  report.filtered.lk = filter_metric(a.lk, h.lk);
  report.filtered.ec = filter_metric(a.ec, h.ec);
  report.epdms = aggregate_epdms(a, h, w);
  return report;
}

std::string report_to_json(const MetricReport& report) {
  using nlohmann::json;
  const auto to_json = [](const SubMetrics& m) {
    return json{{"nc", m.nc}, {"dac", m.dac}, {"ddc", m.ddc},
                {"tlc", m.tlc}, {"ttc", m.ttc}, {"ep", m.ep},
                {"hc", m.hc},   {"lk", m.lk},   {"ec", m.ec}};
  };
  const json j{{"agent", to_json(report.agent)},
               {"human", to_json(report.human)},
               {"filtered", to_json(report.filtered)},
               {"epdms", report.epdms}};
  return j.dump(2);
}

}  // namespace bevplan::epdms
