#include "bevplan/scorer/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bevplan/rng.hpp"

namespace bevplan::scorer {

using scene::Trajectory;

namespace {

constexpr const char* kHeads[4] = {"head_epdms", "head_nc", "head_dac", "head_comfort"};

Vec embed_input(const ScorerModel& model, const Trajectory& traj) {
  const int t_count = model.steps;
  const int pe = model.posenc_dim;
  Vec x(3 * t_count + t_count * pe);
  for (int t = 0; t < t_count; ++t) {
    const scene::Pose2& p = traj.poses[static_cast<std::size_t>(t)];
    x(3 * t) = p.x;
    x(3 * t + 1) = p.y;
    x(3 * t + 2) = p.yaw;
  }
  for (int t = 0; t < t_count; ++t) {
    x.segment(3 * t_count + t * pe, pe) = nn::positional_encoding(t, pe);
  }
  return x;
}

struct ForwardCache {
  Vec input;
  nn::MlpCache embed;
  Vec query;
  std::vector<Vec> kv_in;
  Mat k, v;
  nn::AttnCache attn;
  Vec attn_out;
  Vec logits;  // 4
};

ForwardCache forward(const ScorerModel& model, const Trajectory& traj,
                     const bev::BevGrid& grid) {
  if (traj.steps() != model.steps) {
    throw std::invalid_argument("score_trajectory: step mismatch");
  }
  ForwardCache c;
  c.input = embed_input(model, traj);
  c.query = nn::mlp_forward(model.params, "embed", model.embed_spec(), c.input, &c.embed);

  const Mat feats = bev::sample_bev(grid, traj);
  const int t_count = model.steps;
  const int pe = model.posenc_dim;
  c.k.resize(t_count, model.embed_dim);
  c.v.resize(t_count, model.embed_dim);
  c.kv_in.reserve(static_cast<std::size_t>(t_count));
  for (int t = 0; t < t_count; ++t) {
    Vec row(model.channels + pe);
    row.head(model.channels) = feats.row(t).transpose();
    row.tail(pe) = nn::positional_encoding(t, pe);
    c.k.row(t) = nn::linear_forward(model.params, "kproj", row).transpose();
    c.v.row(t) = nn::linear_forward(model.params, "vproj", row).transpose();
    c.kv_in.push_back(std::move(row));
  }
  c.attn_out = nn::attention(c.query, c.k, c.v, &c.attn);
  c.logits.resize(4);
  for (int h = 0; h < 4; ++h) {
    c.logits(h) = nn::linear_forward(model.params, kHeads[h], c.attn_out)(0);
  }
  return c;
}

ScorePrediction to_prediction(const Vec& logits) {
  return ScorePrediction{nn::sigmoid(logits(0)), nn::sigmoid(logits(1)),
                         nn::sigmoid(logits(2)), nn::sigmoid(logits(3))};
}

// Backprop from per-head logit gradients; accumulates into params.grad.
void backward(ScorerModel& model, const ForwardCache& c, const Vec& dlogits) {
  Vec dattn = Vec::Zero(model.embed_dim);
  for (int h = 0; h < 4; ++h) {
    Vec dy(1);
    dy(0) = dlogits(h);
    dattn += nn::linear_backward(model.params, kHeads[h], c.attn_out, dy);
  }
  Vec dq;
  Mat dk, dv;
  nn::attention_backward(c.attn, dattn, &dq, &dk, &dv);
  for (int t = 0; t < model.steps; ++t) {
    nn::linear_backward(model.params, "kproj", c.kv_in[static_cast<std::size_t>(t)],
                        dk.row(t).transpose());
    nn::linear_backward(model.params, "vproj", c.kv_in[static_cast<std::size_t>(t)],
                        dv.row(t).transpose());
  }
  nn::mlp_backward(model.params, "embed", model.embed_spec(), c.embed, dq);
}

}  // namespace

nn::MlpSpec ScorerModel::embed_spec() const {
  const int in = 3 * steps + steps * posenc_dim;
  return nn::MlpSpec{{in, embed_dim, embed_dim}};
}

ScorerModel make_scorer(int steps, int channels, int embed_dim, int posenc_dim,
                        std::uint64_t seed) {
  ScorerModel model{steps, channels, embed_dim, posenc_dim, nn::ParamStore(seed)};
  nn::add_mlp(model.params, "embed", model.embed_spec());
  nn::add_linear(model.params, "kproj", embed_dim, channels + posenc_dim);
  nn::add_linear(model.params, "vproj", embed_dim, channels + posenc_dim);
  for (const char* head : kHeads) nn::add_linear(model.params, head, 1, embed_dim);
  return model;
}

ScorePrediction score_trajectory(const ScorerModel& model, const Trajectory& traj,
                                 const bev::BevGrid& grid) {
  return to_prediction(forward(model, traj, grid).logits);
}

std::vector<ScorePrediction> score_batch(const ScorerModel& model,
                                         const decoder::CandidateSet& candidates,
                                         const bev::BevGrid& grid) {
  std::vector<ScorePrediction> out;
  out.reserve(candidates.trajectories.size());
  for (const Trajectory& t : candidates.trajectories) {
    out.push_back(score_trajectory(model, t, grid));
  }
  return out;
}

int select_trajectory(const std::vector<ScorePrediction>& predictions) {
  if (predictions.empty()) {
    throw std::invalid_argument("select_trajectory: empty candidate set");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(predictions.size()); ++i) {
    if (predictions[static_cast<std::size_t>(i)].epdms_hat >
        predictions[static_cast<std::size_t>(best)].epdms_hat) {
      best = i;
    }
  }
  return best;
}

std::vector<Scalar> train_scorer(ScorerModel& model,
                                 const std::vector<const scene::Scenario*>& dataset,
                                 const anchors::AnchorDictionary& dict,
                                 const decoder::DecoderModel& decoder_model,
                                 const bev::RenderParams& render_params,
                                 const TrainOptions& opts) {
  if (dataset.empty()) throw std::invalid_argument("train_scorer: empty dataset");

  std::vector<const scene::Scenario*> ordered = dataset;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const scene::Scenario* a, const scene::Scenario* b) { return a->id < b->id; });

  // Candidates and oracle labels are fixed by the frozen decoder; compute
  // them once per unique scenario.
  struct Prepared {
    bev::BevGrid grid;
    std::vector<Trajectory> candidates;
    std::vector<Eigen::Vector4d> labels;  // epdms, nc, dac, hc
  };
  std::map<const scene::Scenario*, Prepared> prepared;
  for (const scene::Scenario* s : ordered) {
    if (prepared.count(s)) continue;
    Prepared p;
    p.grid = bev::render_bev(*s, render_params);
    p.candidates = decoder::generate_candidates(decoder_model, dict, p.grid).trajectories;
    for (const Trajectory& cand : p.candidates) {
      const epdms::MetricReport rep = epdms::evaluate(*s, cand, opts.weights, opts.thresholds);
      p.labels.emplace_back(rep.epdms, rep.agent.nc, rep.agent.dac, rep.agent.hc);
    }
    prepared.emplace(s, std::move(p));
  }

  Rng shuffle_rng(opts.seed ^ 0x5ca1ab1eULL);
  Rng mask_rng(opts.seed ^ 0xdecafbadULL);
  std::vector<Scalar> history;
  const long cap = opts.max_steps >= 0
                       ? opts.max_steps
                       : static_cast<long>(opts.epochs) * static_cast<long>(ordered.size());
  long updates = 0;
  for (int epoch = 0; updates < cap; ++epoch) {
    std::vector<std::size_t> order(ordered.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(
                                  shuffle_rng.uniform_int(0, static_cast<int>(i) - 1))]);
    }
    for (std::size_t idx : order) {
      if (updates >= cap) break;
      const Prepared& p = prepared.at(ordered[idx]);
      const std::uint64_t mask_seed = mask_rng.next_u64();
      const bev::BevGrid* grid = &p.grid;
      bev::BevGrid masked;
      if (opts.gridmask_prob > 0.0) {
        masked = bev::grid_mask(p.grid, opts.gridmask_prob, mask_seed, opts.gridmask);
        grid = &masked;
      }

      model.params.zero_grads();
      Scalar loss = 0.0;
      const Scalar inv = 1.0 / static_cast<Scalar>(p.candidates.size());
      for (std::size_t i = 0; i < p.candidates.size(); ++i) {
        const ForwardCache c = forward(model, p.candidates[i], *grid);
        const Eigen::Vector4d& y = p.labels[i];
        Vec dlogits(4);
        // MSE on the epdms head.
        const Scalar pe = nn::sigmoid(c.logits(0));
        loss += (pe - y(0)) * (pe - y(0));
        dlogits(0) = 2.0 * (pe - y(0)) * pe * (1.0 - pe);
        // BCE on the binary heads; d(loss)/d(logit) = sigmoid - label.
        for (int h = 1; h < 4; ++h) {
          const Scalar ph = nn::sigmoid(c.logits(h));
          const Scalar eps = 1e-12;
          loss += -(y(h) * std::log(ph + eps) + (1.0 - y(h)) * std::log(1.0 - ph + eps));
          dlogits(h) = ph - y(h);
        }
        backward(model, c, (dlogits * inv).eval());
      }
      nn::sgd_step(model.params, opts.lr);
      history.push_back(loss * inv);
      ++updates;
    }
  }
  return history;
}

}  // namespace bevplan::scorer
