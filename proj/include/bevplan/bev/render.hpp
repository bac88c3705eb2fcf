// Renders the BEV feature grid from scene geometry. Deterministic: every
// channel is a pure function of the scenario.
#pragma once

#include "bevplan/bev/grid.hpp"
#include "bevplan/scene/types.hpp"

namespace bevplan::bev {

struct RenderParams {
  GridSpec spec;
  Scalar distance_clamp = 8.0;  // meters, for distance channels
  // A cell holds a red stop line when its center lies within this distance
  // of the segment; defaults to half a cell diagonal at 100 cells / 64 m.
  Scalar stop_line_halfwidth = 0.46;
};

// Channel layout (see bev::Channel):
//   0 drivable mask at cell centers
//   1 signed distance to the drivable boundary, clamped, scaled to [-1, 1]
//   2 distance to the nearest centerline, clamped, scaled to [0, 1]
//   3, 4 cos/sin of the nearest lane direction (ego frame); zero without lanes
//   5 agent occupancy at the current step
//   6 agent occupancy union over the future track
//   7 red-light stop-line rasterization
BevGrid render_bev(const scene::Scenario& s, const RenderParams& params = {});

}  // namespace bevplan::bev
