// Anchored-query trajectory decoder: each anchor is embedded once, then its
// hypothesis is refined over L layers. A layer samples BEV features along
// the current hypothesis, projects them to attention keys/values, attends
// with the anchor query, and maps the attended vector to per-step offsets
// clipped to +-delta_max per coordinate.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevplan/anchors/dictionary.hpp"
#include "bevplan/bev/grid.hpp"
#include "bevplan/bev/render.hpp"
#include "bevplan/nn/core.hpp"
#include "bevplan/scene/types.hpp"

namespace bevplan::decoder {

struct DecoderConfig {
  int layers = 2;          // L
  Scalar delta_max = 1.0;  // meters (and radians for yaw) per coordinate per layer
  int embed_dim = 64;      // d
  int posenc_dim = 16;     // per-step positional encoding width, even
};

struct DecoderModel {
  DecoderConfig cfg;
  int steps = 8;     // T
  int channels = 8;  // BEV channel count C
  nn::ParamStore params;

  nn::MlpSpec trajenc_spec() const;
  std::string layer_prefix(int j) const { return "layer" + std::to_string(j); }
};

// Registers all parameters: "trajenc" MLP plus per-layer "layer<j>.k",
// "layer<j>.v" projections (C + posenc_dim -> d) and "layer<j>.off" offset
// head (d -> 3T).
DecoderModel make_decoder(const DecoderConfig& cfg, int steps, int channels,
                          std::uint64_t seed);

// Anchor embedding: flattened T x 3 poses concatenated with the per-step
// positional encodings, through the shared MLP.
Vec traj_enc(const DecoderModel& model, const scene::Trajectory& traj,
             nn::MlpCache* cache = nullptr);

// Per-layer forward state kept for backprop.
struct LayerCache {
  std::vector<Vec> kv_in;  // T rows of [sampled features; posenc(t)]
  Mat k, v;                // T x d
  nn::AttnCache attn;
  Vec attn_out;            // d
  Vec raw;                 // 3T unclipped offsets
};

struct LayerResult {
  Mat offsets;  // T x 3, clipped
  scene::Trajectory next;
  LayerCache cache;
};

LayerResult decode_layer(const DecoderModel& model, int layer, const Vec& query,
                         const scene::Trajectory& hypothesis, const bev::BevGrid& grid,
                         bool want_cache = false);

// Backprop through one cached layer application. `dnext` is the upstream
// gradient with respect to the refined poses, flattened step-major as
// (x, y, yaw) per step; clipped offset coordinates pass no gradient.
// Accumulates parameter grads and returns the query gradient. Gradients do
// not flow into the sampled features (sampling positions are treated as
// constants).
Vec decode_layer_backward(DecoderModel& model, int layer, const LayerResult& result,
                          const Vec& dnext);

struct CandidateSet {
  std::vector<scene::Trajectory> trajectories;                // N refined candidates
  std::vector<std::vector<scene::Trajectory>> intermediates;  // [i][j], j = 0..L
};

CandidateSet generate_candidates(const DecoderModel& model,
                                 const anchors::AnchorDictionary& dict,
                                 const bev::BevGrid& grid);

struct TrainOptions {
  int epochs = 30;
  int max_steps = -1;  // cap on update count; < 0 means epochs * dataset size
  Scalar lr = 1e-2;
  Scalar gridmask_prob = 0.0;  // 0 disables augmentation
  bev::GridMaskParams gridmask;
  std::uint64_t seed = 0;
};

// Winner-take-all imitation: per scenario, only the candidate whose anchor
// is nearest to the human trajectory receives a mean-L1 loss against it.
// The dataset (a schedule, possibly with repeats) is canonicalized by
// scenario id before the seeded per-epoch shuffle, so input order does not
// affect the result. Returns the per-update loss history.
std::vector<Scalar> train_decoder(DecoderModel& model,
                                  const std::vector<const scene::Scenario*>& dataset,
                                  const anchors::AnchorDictionary& dict,
                                  const bev::RenderParams& render_params,
                                  const TrainOptions& opts);

// Mean L1 (wrapped for yaw) between a trajectory and a reference.
Scalar mean_l1(const scene::Trajectory& a, const scene::Trajectory& b);

}  // namespace bevplan::decoder
