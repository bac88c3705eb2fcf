// Anchor trajectory dictionary: K-means over a trajectory corpus, serving
// cluster-representative maneuvers as proposal initializations.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevplan/scene/types.hpp"

namespace bevplan::anchors {

struct AnchorDictionary {
  std::vector<scene::Trajectory> anchors;  // N trajectories, shared T and dt
  // Build metadata.
  int corpus_size = 0;
  int iterations = 0;
  std::vector<Scalar> inertia_history;  // one entry per Lloyd iteration

  int count() const { return static_cast<int>(anchors.size()); }
  int steps() const { return anchors.empty() ? 0 : anchors.front().steps(); }
};

// K-means (k-means++ init, Lloyd iterations until the max centroid shift
// drops below 1e-6 m or 100 iterations) over flattened (x, y) positions.
// Yaw is excluded from clustering and re-derived per anchor by finite
// differences. Empty clusters are reseeded to the corpus point farthest
// from its assigned centroid. Deterministic given (corpus order, n, seed).
// Throws std::invalid_argument for a corpus smaller than n or with
// inconsistent step counts.
AnchorDictionary build_dictionary(const std::vector<scene::Trajectory>& corpus, int n,
                                  std::uint64_t seed);

// Index of the anchor minimizing summed squared (x, y) distance to traj;
// ties break to the lowest index.
int nearest_anchor(const AnchorDictionary& dict, const scene::Trajectory& traj);

void save_dictionary(const AnchorDictionary& dict, const std::string& path);
AnchorDictionary load_dictionary(const std::string& path);

// Deterministic synthetic corpus: straights, arcs at several curvatures and
// speeds, and lane changes, with mild seeded jitter. All trajectories have
// `steps` poses at `dt`.
std::vector<scene::Trajectory> synthetic_corpus(int steps, Scalar dt, std::uint64_t seed,
                                                int variants_per_shape = 3);

}  // namespace bevplan::anchors
