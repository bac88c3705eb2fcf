// Image-space post-selection: kinematic distance envelope, projection of the
// candidate with an ego-width band into the camera, and filtering against
// detected obstacles and the lane-line corridor, with a fallback to the
// scorer's top choice when nothing survives.
#pragma once

#include <vector>

#include "bevplan/decoder/decoder.hpp"
#include "bevplan/scene/types.hpp"
#include "bevplan/scorer/scorer.hpp"

namespace bevplan::postproc {

struct DistanceEnvelope {
  Scalar d_min = 0.0;
  Scalar d_max = 0.0;
};

// Reachable travel-distance range over `horizon_s` from speed v with
// accelerations in [a_min, a_max]; speed is clamped at zero (a braking ego
// stops and stays stopped). d_min is never negative.
DistanceEnvelope distance_envelope(const scene::EgoState& ego, Scalar horizon_s,
                                   Scalar a_min, Scalar a_max);

struct ProjectedBand {
  std::vector<Vec2> left;           // image-space pixels
  std::vector<Vec2> right;
  std::vector<bool> left_visible;   // false for points behind the camera
  std::vector<bool> right_visible;
};

// Offsets each pose laterally by +-width/2, lifts to the ground plane (z=0,
// ego frame), transforms into the camera frame and pinhole-projects.
ProjectedBand project_band(const scene::Trajectory& traj, Scalar ego_width,
                           const scene::CameraModel& cam);

enum class DiscardReason { kKept, kEnvelope, kObstacle, kLane };

struct FilterParams {
  Scalar a_min = -3.0;  // m/s^2
  Scalar a_max = 2.0;   // m/s^2
};

struct FilterResult {
  std::vector<int> survivors;            // indices, ascending
  std::vector<DiscardReason> reasons;    // one per candidate
  int chosen = -1;
  bool fallback = false;                 // nothing survived; chose global argmax
};

// Discards candidates whose ego-frame arc length leaves the envelope, whose
// visible band crosses a detected obstacle box, or whose band exits the
// lane-line corridor (only applied when >= 2 lane polylines exist). Among
// survivors picks the argmax of epdms_hat; with no survivors falls back to
// the global argmax and sets the flag.
FilterResult filter_candidates(const decoder::CandidateSet& candidates,
                               const std::vector<scorer::ScorePrediction>& predictions,
                               const scene::Scenario& s, const FilterParams& params = {});

// Total 2D arc length of an ego-frame trajectory, from the origin.
Scalar arc_length(const scene::Trajectory& traj);

const char* discard_reason_name(DiscardReason reason);

}  // namespace bevplan::postproc
