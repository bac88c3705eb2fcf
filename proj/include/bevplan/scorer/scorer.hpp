// Simulation-supervised trajectory scorer: embeds a candidate, cross-attends
// to the BEV features sampled along it, and predicts the aggregate driving
// score plus interpretable collision / drivable-area / comfort probabilities.
// Labels come from the deterministic metric oracle.
#pragma once

#include <cstdint>
#include <vector>

#include "bevplan/anchors/dictionary.hpp"
#include "bevplan/bev/grid.hpp"
#include "bevplan/bev/render.hpp"
#include "bevplan/decoder/decoder.hpp"
#include "bevplan/epdms/metrics.hpp"
#include "bevplan/nn/core.hpp"
#include "bevplan/scene/types.hpp"

namespace bevplan::scorer {

struct ScorePrediction {
  Scalar epdms_hat = 0.5;    // overall quality, sigmoid output
  Scalar nc_hat = 0.5;       // collision avoidance probability
  Scalar dac_hat = 0.5;      // drivable area compliance probability
  Scalar comfort_hat = 0.5;  // history-comfort probability
};

struct ScorerModel {
  int steps = 8;
  int channels = 8;
  int embed_dim = 64;
  int posenc_dim = 16;
  nn::ParamStore params;

  nn::MlpSpec embed_spec() const;
};

ScorerModel make_scorer(int steps, int channels, int embed_dim, int posenc_dim,
                        std::uint64_t seed);

ScorePrediction score_trajectory(const ScorerModel& model, const scene::Trajectory& traj,
                                 const bev::BevGrid& grid);

std::vector<ScorePrediction> score_batch(const ScorerModel& model,
                                         const decoder::CandidateSet& candidates,
                                         const bev::BevGrid& grid);

// Index of the argmax of epdms_hat; ties break to the lowest index. Throws
// std::invalid_argument on an empty input.
int select_trajectory(const std::vector<ScorePrediction>& predictions);

struct TrainOptions {
  int epochs = 30;
  int max_steps = -1;  // cap on update count; < 0 means epochs * dataset size
  Scalar lr = 5e-2;
  Scalar gridmask_prob = 0.0;
  bev::GridMaskParams gridmask;
  std::uint64_t seed = 0;
  epdms::MetricWeights weights;
  epdms::Thresholds thresholds;
};

// For every scenario: candidates from the frozen decoder, oracle labels
// (epdms, nc, dac, hc) per candidate, then per-scenario minibatch SGD with
// MSE on the epdms head and BCE on the binary heads. Dataset order is
// canonicalized by scenario id before the seeded shuffle. Returns the
// per-update mean loss history.
std::vector<Scalar> train_scorer(ScorerModel& model,
                                 const std::vector<const scene::Scenario*>& dataset,
                                 const anchors::AnchorDictionary& dict,
                                 const decoder::DecoderModel& decoder_model,
                                 const bev::RenderParams& render_params,
                                 const TrainOptions& opts);

}  // namespace bevplan::scorer
