// Ego-centered BEV feature grid and the trajectory-conditioned sampler.
// The grid is queryable memory: channels are H x W matrices indexed
// (ix, iy) with ix along ego-x (forward) and iy along ego-y (left);
// cell centers sit at extent*(-1/2) + (i + 1/2)*cell_size.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevplan/scene/types.hpp"
#include "bevplan/types.hpp"

namespace bevplan::bev {

// Channel semantics, fixed by the renderer.
enum Channel : int {
  kDrivableMask = 0,
  kBoundaryDistance = 1,   // signed, clamped to +-clamp_m, scaled to [-1, 1]
  kCenterlineDistance = 2, // clamped to clamp_m, scaled to [0, 1]
  kLaneCos = 3,
  kLaneSin = 4,
  kOccupancyNow = 5,
  kOccupancyFuture = 6,
  kRedStopLine = 7,
};
inline constexpr int kChannelCount = 8;

struct GridSpec {
  Scalar extent = 64.0;  // meters per side
  int cells = 100;       // cells per side (H = W)

  Scalar cell_size() const { return extent / cells; }
  // Center of cell i along one axis, in ego coordinates.
  Scalar center(int i) const { return -0.5 * extent + (i + 0.5) * cell_size(); }
};

struct BevGrid {
  GridSpec spec;
  std::vector<Mat> channels;  // kChannelCount matrices, cells x cells

  static BevGrid zeros(const GridSpec& spec);
  bool in_extent(const Vec2& p) const {
    const Scalar h = 0.5 * spec.extent;
    return p.x() >= -h && p.x() <= h && p.y() >= -h && p.y() <= h;
  }
};

// Bilinear samples of all channels at each trajectory pose position
// (ego frame). Returns a T x C matrix, one row per step. Positions outside
// the extent yield exact zero rows; in-extent positions clamp to the cell
// center hull, so a constant grid samples to that constant everywhere
// inside.
Mat sample_bev(const BevGrid& grid, const scene::Trajectory& traj);

// Single-position variant of the above.
Vec sample_bev_at(const BevGrid& grid, const Vec2& p);

struct GridMaskParams {
  int block = 10;      // masked square side, in cells
  Scalar keep = 0.5;   // kept fraction per axis; period = block / (1 - keep)
};

// With the given probability, zeroes a regular pattern of block x block
// squares across all channels (random pattern offset); otherwise returns the
// grid unchanged. Deterministic for a fixed seed. Expected masked fraction
// when triggered is (1 - keep)^2.
BevGrid grid_mask(const BevGrid& grid, Scalar probability, std::uint64_t seed,
                  const GridMaskParams& params = {});

// Debug dump of one channel as 8-bit PGM (row-major, values rescaled to the
// channel's min/max).
void write_channel_pgm(const BevGrid& grid, int channel, const std::string& path);

}  // namespace bevplan::bev
