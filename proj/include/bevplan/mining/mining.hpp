// Hard case mining: tags difficult scenarios from human trajectory geometry
// and file annotations, and builds the upsampled training schedule.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "bevplan/scene/types.hpp"

namespace bevplan::mining {

struct MiningParams {
  Scalar curvature_threshold = 0.2;       // 1/m on the human trajectory
  Scalar lane_departure_threshold = 1.0;  // m from the nearest centerline
  int multiplicity = 3;                   // total copies of a hard scenario
};

struct HardCaseReport {
  std::string scenario_id;
  std::set<std::string> tags;    // subset of the fixed tag set below
  Scalar max_curvature = 0.0;    // 1/m
  Scalar max_lateral_offset = 0.0;  // m

  bool is_hard() const { return !tags.empty(); }
};

// Fixed tag vocabulary. sharp_curve and lane_departure are derived from the
// human trajectory; unprotected_turn and occluded_junction pass through from
// the scenario's annotation tags.
extern const char* const kSharpCurve;
extern const char* const kLaneDeparture;
extern const char* const kUnprotectedTurn;
extern const char* const kOccludedJunction;

HardCaseReport detect_hard_case(const scene::Scenario& s, const MiningParams& params = {});

// Training schedule: hard scenarios appear `multiplicity` times, others once,
// original order with duplicates adjacent. Throws std::invalid_argument when
// an id has no report.
std::vector<std::string> upsample(const std::vector<std::string>& dataset_ids,
                                  const std::vector<HardCaseReport>& reports,
                                  const MiningParams& params = {});

// Max discrete curvature over consecutive point triples (three-point
// circumscribed circle), with the ego origin prepended as the path start.
Scalar max_discrete_curvature(const scene::Trajectory& traj);

}  // namespace bevplan::mining
