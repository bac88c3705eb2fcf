// Deterministic closed-loop metric oracle: nine sub-metrics evaluated by
// rolling the ego along a trajectory at 2 Hz with agents following their
// recorded tracks open-loop, a human-fallback filter, and the aggregate
// extended PDM score. Also the label source for scorer training.
#pragma once

#include <string>

#include "bevplan/scene/types.hpp"

namespace bevplan::epdms {

struct SubMetrics {
  Scalar nc = 1.0;   // no at-fault collisions, {0, 1}
  Scalar dac = 1.0;  // drivable area compliance, {0, 1}
  Scalar ddc = 1.0;  // driving direction compliance, {0, 0.5, 1}
  Scalar tlc = 1.0;  // traffic light compliance, {0, 1}
  Scalar ttc = 1.0;  // time-to-collision clearance, {0, 1}
  Scalar ep = 1.0;   // ego progress, [0, 1]
  Scalar hc = 1.0;   // history comfort, {0, 1}
  Scalar lk = 1.0;   // lane keeping, [0, 1]
  Scalar ec = 1.0;   // extended comfort vs previous plan, {0, 1}
};

struct MetricWeights {
  Scalar ttc = 1.0, ep = 1.0, hc = 1.0, lk = 1.0, ec = 1.0;
};

struct Thresholds {
  Scalar stationary_speed = 0.1;   // m/s, below which ego counts as stopped
  Scalar ddc_minor = 2.0;          // m of backward motion for score 1 -> 0.5
  Scalar ddc_major = 6.0;          // m of backward motion for score 0.5 -> 0
  Scalar ep_min_reference = 5.0;   // m, floor on the human progress denominator
  Scalar ep_negligible = 0.1;      // m, below which progress is unachievable
  Scalar ttc_horizon = 1.0;        // s of constant-velocity projection
  Scalar ttc_step = 0.1;           // s between projection checks
  Scalar hc_max_lon_accel = 4.0;   // m/s^2
  Scalar hc_max_lat_accel = 4.0;   // m/s^2
  Scalar hc_max_jerk = 8.0;        // m/s^3
  Scalar hc_max_yaw_rate = 1.0;    // rad/s
  Scalar lk_max_lateral = 0.5;     // m from the nearest centerline
  Scalar ec_max_accel_diff = 2.0;  // m/s^2 vs the previous plan
};

struct MetricReport {
  SubMetrics agent;
  SubMetrics human;
  SubMetrics filtered;  // per-metric filter outputs
  Scalar epdms = 0.0;
};

// Rolls the ego along traj (ego-frame poses composed onto the current ego
// pose) and scores each sub-metric per the definitions in the .cpp.
SubMetrics eval_submetrics(const scene::Scenario& s, const scene::Trajectory& traj,
                           const Thresholds& thr = {});

// Human-fallback filter: full credit when the human reference also fails
// the metric outright.
inline Scalar filter_metric(Scalar agent_value, Scalar human_value) {
  return human_value == 0.0 ? 1.0 : agent_value;
}

// Product of the filtered multiplicative terms {NC, DAC, DDC, TLC} times the
// weighted mean of the filtered terms {TTC, EP, HC, LK, EC}. Throws
// std::invalid_argument when the weight sum is not positive.
Scalar aggregate_epdms(const SubMetrics& agent, const SubMetrics& human,
                       const MetricWeights& w);

MetricReport evaluate(const scene::Scenario& s, const scene::Trajectory& traj,
                      const MetricWeights& w = {}, const Thresholds& thr = {});

std::string report_to_json(const MetricReport& report);

}  // namespace bevplan::epdms
