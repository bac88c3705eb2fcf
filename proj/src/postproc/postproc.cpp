#include "bevplan/postproc/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bevplan::postproc {

using scene::Trajectory;

DistanceEnvelope distance_envelope(const scene::EgoState& ego, Scalar horizon_s,
                                   Scalar a_min, Scalar a_max) {
  if (!(horizon_s > 0.0)) throw std::invalid_argument("distance_envelope: horizon must be > 0");
  if (a_min > a_max) throw std::invalid_argument("distance_envelope: a_min > a_max");
  const Scalar v = ego.speed;
  const auto distance = [&](Scalar a) {
    if (a < 0.0) {
      const Scalar stop_t = v / -a;
      if (stop_t < horizon_s) return v * stop_t + 0.5 * a * stop_t * stop_t;
    }
    return v * horizon_s + 0.5 * a * horizon_s * horizon_s;
  };
  DistanceEnvelope env;
  env.d_min = std::max(0.0, distance(a_min));
  env.d_max = std::max(0.0, distance(a_max));
  return env;
}

ProjectedBand project_band(const Trajectory& traj, Scalar ego_width,
                           const scene::CameraModel& cam) {
  constexpr Scalar kMinDepth = 1e-9;
  ProjectedBand band;
  const auto project = [&](const Vec2& ground, Vec2* pixel) {
    const Vec3 p_cam = cam.rotation * Vec3(ground.x(), ground.y(), 0.0) + cam.translation;
    if (p_cam.z() <= kMinDepth) {
      *pixel = Vec2::Zero();
      return false;
    }
    *pixel = Vec2(cam.fx * p_cam.x() / p_cam.z() + cam.cx,
                  cam.fy * p_cam.y() / p_cam.z() + cam.cy);
    return true;
  };
  for (const scene::Pose2& p : traj.poses) {
    const Vec2 left_normal(-std::sin(p.yaw), std::cos(p.yaw));
    Vec2 px;
    bool vis = project(p.position() + 0.5 * ego_width * left_normal, &px);
    band.left.push_back(px);
    band.left_visible.push_back(vis);
    vis = project(p.position() - 0.5 * ego_width * left_normal, &px);
    band.right.push_back(px);
    band.right_visible.push_back(vis);
  }
  return band;
}

Scalar arc_length(const Trajectory& traj) {
  Scalar total = 0.0;
  Vec2 prev = Vec2::Zero();
  for (const scene::Pose2& p : traj.poses) {
    total += (p.position() - prev).norm();
    prev = p.position();
  }
  return total;
}

namespace {

bool segment_hits_box(const Vec2& a, const Vec2& b, const scene::ImageBox& box) {
  // Liang-Barsky clip of the segment against the box.
  const Scalar dx = b.x() - a.x(), dy = b.y() - a.y();
  Scalar t0 = 0.0, t1 = 1.0;
  const Scalar p[4] = {-dx, dx, -dy, dy};
  const Scalar q[4] = {a.x() - box.u_min, box.u_max - a.x(), a.y() - box.v_min,
                       box.v_max - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const Scalar r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

bool band_hits_obstacles(const ProjectedBand& band, const std::vector<scene::ImageBox>& boxes) {
  const auto polyline_hits = [&](const std::vector<Vec2>& pts, const std::vector<bool>& vis) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (!vis[i] || !vis[i + 1]) continue;  // visible segments only
      for (const scene::ImageBox& box : boxes) {
        if (segment_hits_box(pts[i], pts[i + 1], box)) return true;
      }
    }
    return false;
  };
  return polyline_hits(band.left, band.left_visible) ||
         polyline_hits(band.right, band.right_visible);
}

// Interpolated u of a lane polyline at image row v; the polyline is treated
// as a function of v (points sorted by v, ends clamped).
Scalar lane_u_at(const std::vector<Vec2>& sorted_lane, Scalar v) {
  if (sorted_lane.size() == 1) return sorted_lane.front().x();
  if (v <= sorted_lane.front().y()) return sorted_lane.front().x();
  if (v >= sorted_lane.back().y()) return sorted_lane.back().x();
  for (std::size_t i = 0; i + 1 < sorted_lane.size(); ++i) {
    const Vec2& a = sorted_lane[i];
    const Vec2& b = sorted_lane[i + 1];
    if (v >= a.y() && v <= b.y()) {
      const Scalar span = b.y() - a.y();
      const Scalar t = span > 0.0 ? (v - a.y()) / span : 0.0;
      return a.x() + t * (b.x() - a.x());
    }
  }
  return sorted_lane.back().x();
}

bool band_exits_corridor(const ProjectedBand& band,
                         const std::vector<std::vector<Vec2>>& lane_lines) {
  // Corridor between the leftmost and rightmost lane polylines (by mean u).
  std::size_t left_idx = 0, right_idx = 0;
  Scalar left_mean = std::numeric_limits<Scalar>::infinity();
  Scalar right_mean = -left_mean;
  for (std::size_t i = 0; i < lane_lines.size(); ++i) {
    if (lane_lines[i].empty()) continue;
    Scalar mean = 0.0;
    for (const Vec2& p : lane_lines[i]) mean += p.x();
    mean /= static_cast<Scalar>(lane_lines[i].size());
    if (mean < left_mean) {
      left_mean = mean;
      left_idx = i;
    }
    if (mean > right_mean) {
      right_mean = mean;
      right_idx = i;
    }
  }
  if (left_idx == right_idx) return false;

  auto left_lane = lane_lines[left_idx];
  auto right_lane = lane_lines[right_idx];
  const auto by_v = [](const Vec2& a, const Vec2& b) { return a.y() < b.y(); };
  std::sort(left_lane.begin(), left_lane.end(), by_v);
  std::sort(right_lane.begin(), right_lane.end(), by_v);

  const auto outside = [&](const std::vector<Vec2>& pts, const std::vector<bool>& vis) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!vis[i]) continue;
      const Scalar u_left = lane_u_at(left_lane, pts[i].y());
      const Scalar u_right = lane_u_at(right_lane, pts[i].y());
      if (pts[i].x() < u_left || pts[i].x() > u_right) return true;
    }
    return false;
  };
  return outside(band.left, band.left_visible) || outside(band.right, band.right_visible);
}

}  // namespace

FilterResult filter_candidates(const decoder::CandidateSet& candidates,
                               const std::vector<scorer::ScorePrediction>& predictions,
                               const scene::Scenario& s, const FilterParams& params) {
  const std::size_t n = candidates.trajectories.size();
  if (n == 0) throw std::invalid_argument("filter_candidates: empty candidate set");
  if (predictions.size() != n) {
    throw std::invalid_argument("filter_candidates: predictions/candidates size mismatch");
  }

  const Trajectory& first = candidates.trajectories.front();
  const Scalar horizon = first.steps() * first.dt;
  const DistanceEnvelope env = distance_envelope(s.ego, horizon, params.a_min, params.a_max);
  const bool lane_filter = s.detections2d.lane_lines.size() >= 2;

  FilterResult result;
  result.reasons.assign(n, DiscardReason::kKept);
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory& traj = candidates.trajectories[i];
    const Scalar len = arc_length(traj);
    if (len < env.d_min || len > env.d_max) {
      result.reasons[i] = DiscardReason::kEnvelope;
      continue;
    }
    const ProjectedBand band = project_band(traj, s.ego.width, s.camera);
    if (band_hits_obstacles(band, s.detections2d.obstacles)) {
      result.reasons[i] = DiscardReason::kObstacle;
      continue;
    }
    if (lane_filter && band_exits_corridor(band, s.detections2d.lane_lines)) {
      result.reasons[i] = DiscardReason::kLane;
      continue;
    }
    result.survivors.push_back(static_cast<int>(i));
  }

  const auto argmax_over = [&](const std::vector<int>& indices) {
    int best = indices.front();
    for (int i : indices) {
      if (predictions[static_cast<std::size_t>(i)].epdms_hat >
          predictions[static_cast<std::size_t>(best)].epdms_hat) {
        best = i;
      }
    }
    return best;
  };
  if (result.survivors.empty()) {
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
    result.chosen = argmax_over(all);
    result.fallback = true;
  } else {
    result.chosen = argmax_over(result.survivors);
  }
  return result;
}

const char* discard_reason_name(DiscardReason reason) {
  switch (reason) {
    case DiscardReason::kKept: return "kept";
    case DiscardReason::kEnvelope: return "envelope";
    case DiscardReason::kObstacle: return "obstacle";
    case DiscardReason::kLane: return "lane";
  }
  return "unknown";
}

}  // namespace bevplan::postproc
