#include "bevplan/mining/mining.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "bevplan/scene/geometry.hpp"

namespace bevplan::mining {

const char* const kSharpCurve = "sharp_curve";
const char* const kLaneDeparture = "lane_departure";
const char* const kUnprotectedTurn = "unprotected_turn";
const char* const kOccludedJunction = "occluded_junction";

Scalar max_discrete_curvature(const scene::Trajectory& traj) {
  std::vector<Vec2> pts;
  pts.reserve(traj.poses.size() + 1);
  pts.push_back(Vec2::Zero());
  for (const scene::Pose2& p : traj.poses) pts.push_back(p.position());

  Scalar worst = 0.0;
  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    const Vec2 ab = pts[i + 1] - pts[i];
    const Vec2 bc = pts[i + 2] - pts[i + 1];
    const Vec2 ac = pts[i + 2] - pts[i];
    const Scalar la = ab.norm(), lb = bc.norm(), lc = ac.norm();
    if (la == 0.0 || lb == 0.0 || lc == 0.0) continue;  // degenerate triple
    const Scalar cross = ab.x() * ac.y() - ab.y() * ac.x();
    const Scalar kappa = 2.0 * std::abs(cross) / (la * lb * lc);
    worst = std::max(worst, kappa);
  }
  return worst;
}

HardCaseReport detect_hard_case(const scene::Scenario& s, const MiningParams& params) {
  HardCaseReport report;
  report.scenario_id = s.id;

  report.max_curvature = max_discrete_curvature(s.human_trajectory);
  if (report.max_curvature > params.curvature_threshold) report.tags.insert(kSharpCurve);

  if (!s.centerlines.empty()) {
    for (const scene::Pose2& p : s.human_trajectory.poses) {
      const scene::Pose2 world = scene::compose(s.ego.pose, p);
      const scene::CenterlineQuery q =
          scene::nearest_centerline(world.position(), s.centerlines);
      report.max_lateral_offset = std::max(report.max_lateral_offset, q.distance);
    }
    if (report.max_lateral_offset > params.lane_departure_threshold) {
      report.tags.insert(kLaneDeparture);
    }
  }

  if (s.tags.count(kUnprotectedTurn)) report.tags.insert(kUnprotectedTurn);
  if (s.tags.count(kOccludedJunction)) report.tags.insert(kOccludedJunction);
  return report;
}

std::vector<std::string> upsample(const std::vector<std::string>& dataset_ids,
                                  const std::vector<HardCaseReport>& reports,
                                  const MiningParams& params) {
  std::map<std::string, const HardCaseReport*> by_id;
  for (const HardCaseReport& r : reports) by_id[r.scenario_id] = &r;

  std::vector<std::string> schedule;
  for (const std::string& id : dataset_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("upsample: missing report for " + id);
    const int copies = it->second->is_hard() ? params.multiplicity : 1;
    for (int c = 0; c < copies; ++c) schedule.push_back(id);
  }
  return schedule;
}

}  // namespace bevplan::mining
