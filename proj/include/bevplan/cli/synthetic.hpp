// Deterministic synthetic scenario generator: straights, curves, and
// signalized junctions with lead/cross/parked agents, camera detections
// derived from scene geometry, and a fixed share of scenes whose human
// reference itself violates metrics.
#pragma once

#include <cstdint>
#include <string>

#include "bevplan/scene/types.hpp"

namespace bevplan::cli {

struct SyntheticParams {
  int steps = 8;
  Scalar dt = 0.5;
};

// Deterministic in (seed, index). The layout cycles with index so any block
// of >= 10 consecutive indices covers straights, curves, junctions, a
// red-light-running human, and a drifting human that violates drivable-area
// compliance.
scene::Scenario generate_scenario(std::uint64_t seed, int index,
                                  const SyntheticParams& params = {});

// Writes `count` scenario files scenario_0000.json .. into out_dir.
void generate_dataset(const std::string& out_dir, int count, std::uint64_t seed,
                      const SyntheticParams& params = {});

}  // namespace bevplan::cli
