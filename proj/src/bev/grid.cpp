#include "bevplan/bev/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bevplan/rng.hpp"

namespace bevplan::bev {

BevGrid BevGrid::zeros(const GridSpec& spec) {
  BevGrid g;
  g.spec = spec;
  g.channels.assign(kChannelCount, Mat::Zero(spec.cells, spec.cells));
  return g;
}

Vec sample_bev_at(const BevGrid& grid, const Vec2& p) {
  const int c_count = static_cast<int>(grid.channels.size());
  Vec out = Vec::Zero(c_count);
  if (!grid.in_extent(p)) return out;

  const GridSpec& spec = grid.spec;
  const Scalar cell = spec.cell_size();
  const Scalar half = 0.5 * spec.extent;
  // Continuous cell coordinates: cell centers at integer values, clamped to
  // the cell-center hull.
  const Scalar max_idx = static_cast<Scalar>(spec.cells - 1);
  const Scalar u = std::clamp((p.x() + half) / cell - 0.5, 0.0, max_idx);
  const Scalar v = std::clamp((p.y() + half) / cell - 0.5, 0.0, max_idx);
  const int i0 = std::min(static_cast<int>(std::floor(u)), spec.cells - 2 >= 0 ? spec.cells - 2 : 0);
  const int j0 = std::min(static_cast<int>(std::floor(v)), spec.cells - 2 >= 0 ? spec.cells - 2 : 0);
  const int i1 = std::min(i0 + 1, spec.cells - 1);
  const int j1 = std::min(j0 + 1, spec.cells - 1);
  const Scalar fu = u - i0;
  const Scalar fv = v - j0;

  for (int c = 0; c < c_count; ++c) {
    const Mat& m = grid.channels[static_cast<std::size_t>(c)];
    const Scalar a = m(i0, j0) * (1.0 - fu) * (1.0 - fv) + m(i1, j0) * fu * (1.0 - fv) +
                     m(i0, j1) * (1.0 - fu) * fv + m(i1, j1) * fu * fv;
    out(c) = a;
  }
  return out;
}

Mat sample_bev(const BevGrid& grid, const scene::Trajectory& traj) {
  const int t_count = traj.steps();
  Mat out(t_count, static_cast<int>(grid.channels.size()));
  for (int t = 0; t < t_count; ++t) {
    out.row(t) = sample_bev_at(grid, traj.position(t)).transpose();
  }
  return out;
}

BevGrid grid_mask(const BevGrid& grid, Scalar probability, std::uint64_t seed,
                  const GridMaskParams& params) {
  if (probability < 0.0 || probability > 1.0) {
    throw std::invalid_argument("grid_mask: probability must be in [0, 1]");
  }
  Rng rng(seed);
  if (!rng.bernoulli(probability)) return grid;

  const int period = static_cast<int>(std::lround(params.block / (1.0 - params.keep)));
  const int ox = rng.uniform_int(0, period - 1);
  const int oy = rng.uniform_int(0, period - 1);

  BevGrid out = grid;
  const int n = grid.spec.cells;
  for (int i = 0; i < n; ++i) {
    const bool band_x = (i + ox) % period < params.block;
    if (!band_x) continue;
    for (int j = 0; j < n; ++j) {
      if ((j + oy) % period < params.block) {
        for (Mat& m : out.channels) m(i, j) = 0.0;
      }
    }
  }
  return out;
}

void write_channel_pgm(const BevGrid& grid, int channel, const std::string& path) {
  const Mat& m = grid.channels.at(static_cast<std::size_t>(channel));
  const Scalar lo = m.minCoeff();
  const Scalar hi = m.maxCoeff();
  const Scalar span = hi > lo ? hi - lo : 1.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "P5\n" << m.cols() << " " << m.rows() << "\n255\n";
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      const int v = static_cast<int>(std::lround((m(r, c) - lo) / span * 255.0));
      out.put(static_cast<char>(std::clamp(v, 0, 255)));
    }
  }
}

}  // namespace bevplan::bev
