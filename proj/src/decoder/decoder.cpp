#include "bevplan/decoder/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bevplan/rng.hpp"

namespace bevplan::decoder {

using scene::Pose2;
using scene::Trajectory;

nn::MlpSpec DecoderModel::trajenc_spec() const {
  const int in = 3 * steps + steps * cfg.posenc_dim;
  return nn::MlpSpec{{in, cfg.embed_dim, cfg.embed_dim}};
}

DecoderModel make_decoder(const DecoderConfig& cfg, int steps, int channels,
                          std::uint64_t seed) {
  if (cfg.layers < 1) throw std::invalid_argument("decoder: layers must be >= 1");
  if (!(cfg.delta_max > 0.0)) throw std::invalid_argument("decoder: delta_max must be > 0");
  DecoderModel model{cfg, steps, channels, nn::ParamStore(seed)};
  nn::add_mlp(model.params, "trajenc", model.trajenc_spec());
  const int kv_in = channels + cfg.posenc_dim;
  for (int j = 0; j < cfg.layers; ++j) {
    const std::string prefix = model.layer_prefix(j);
    nn::add_linear(model.params, prefix + ".k", cfg.embed_dim, kv_in);
    nn::add_linear(model.params, prefix + ".v", cfg.embed_dim, kv_in);
    nn::add_linear(model.params, prefix + ".off", 3 * steps, cfg.embed_dim);
  }
  return model;
}

namespace {

Vec trajenc_input(const DecoderModel& model, const Trajectory& traj) {
  const int t_count = model.steps;
  const int pe = model.cfg.posenc_dim;
  Vec x(3 * t_count + t_count * pe);
  for (int t = 0; t < t_count; ++t) {
    const Pose2& p = traj.poses[static_cast<std::size_t>(t)];
    x(3 * t) = p.x;
    x(3 * t + 1) = p.y;
    x(3 * t + 2) = p.yaw;
  }
  for (int t = 0; t < t_count; ++t) {
    x.segment(3 * t_count + t * pe, pe) = nn::positional_encoding(t, pe);
  }
  return x;
}

}  // namespace

Vec traj_enc(const DecoderModel& model, const Trajectory& traj, nn::MlpCache* cache) {
  if (traj.steps() != model.steps) throw std::invalid_argument("traj_enc: step mismatch");
  return nn::mlp_forward(model.params, "trajenc", model.trajenc_spec(),
                         trajenc_input(model, traj), cache);
}

LayerResult decode_layer(const DecoderModel& model, int layer, const Vec& query,
                         const Trajectory& hypothesis, const bev::BevGrid& grid,
                         bool want_cache) {
  const int t_count = model.steps;
  const int pe = model.cfg.posenc_dim;
  const int d = model.cfg.embed_dim;
  const std::string prefix = model.layer_prefix(layer);

  LayerResult out;
  out.cache.kv_in.reserve(static_cast<std::size_t>(t_count));
  out.cache.k.resize(t_count, d);
  out.cache.v.resize(t_count, d);
  const Mat feats = bev::sample_bev(grid, hypothesis);
  for (int t = 0; t < t_count; ++t) {
    Vec row(model.channels + pe);
    row.head(model.channels) = feats.row(t).transpose();
    row.tail(pe) = nn::positional_encoding(t, pe);
    out.cache.k.row(t) = nn::linear_forward(model.params, prefix + ".k", row).transpose();
    out.cache.v.row(t) = nn::linear_forward(model.params, prefix + ".v", row).transpose();
    out.cache.kv_in.push_back(std::move(row));
  }

  out.cache.attn_out = nn::attention(query, out.cache.k, out.cache.v,
                                     want_cache ? &out.cache.attn : nullptr);
  out.cache.raw = nn::linear_forward(model.params, prefix + ".off", out.cache.attn_out);

  const Scalar bound = model.cfg.delta_max;
  out.offsets.resize(t_count, 3);
  out.next = hypothesis;
  for (int t = 0; t < t_count; ++t) {
    for (int c = 0; c < 3; ++c) {
      out.offsets(t, c) = std::clamp(out.cache.raw(3 * t + c), -bound, bound);
    }
    Pose2& p = out.next.poses[static_cast<std::size_t>(t)];
    p.x += out.offsets(t, 0);
    p.y += out.offsets(t, 1);
    p.yaw = wrap_angle(p.yaw + out.offsets(t, 2));
  }
  if (!want_cache) out.cache = LayerCache{};
  return out;
}

Vec decode_layer_backward(DecoderModel& model, int layer, const LayerResult& result,
                          const Vec& dnext) {
  const std::string prefix = model.layer_prefix(layer);
  const Scalar bound = model.cfg.delta_max;
  Vec draw = dnext;
  for (int idx = 0; idx < draw.size(); ++idx) {
    if (std::abs(result.cache.raw(idx)) > bound) draw(idx) = 0.0;
  }
  const Vec dattn =
      nn::linear_backward(model.params, prefix + ".off", result.cache.attn_out, draw);
  Vec dq;
  Mat dk, dv;
  nn::attention_backward(result.cache.attn, dattn, &dq, &dk, &dv);
  for (int t = 0; t < model.steps; ++t) {
    nn::linear_backward(model.params, prefix + ".k",
                        result.cache.kv_in[static_cast<std::size_t>(t)],
                        dk.row(t).transpose());
    nn::linear_backward(model.params, prefix + ".v",
                        result.cache.kv_in[static_cast<std::size_t>(t)],
                        dv.row(t).transpose());
  }
  return dq;
}

CandidateSet generate_candidates(const DecoderModel& model,
                                 const anchors::AnchorDictionary& dict,
                                 const bev::BevGrid& grid) {
  if (dict.steps() != model.steps) {
    throw std::invalid_argument("generate_candidates: dictionary/config step mismatch");
  }
  CandidateSet set;
  set.trajectories.reserve(static_cast<std::size_t>(dict.count()));
  set.intermediates.resize(static_cast<std::size_t>(dict.count()));
  for (int i = 0; i < dict.count(); ++i) {
    const Trajectory& anchor = dict.anchors[static_cast<std::size_t>(i)];
    const Vec query = traj_enc(model, anchor);
    Trajectory hyp = anchor;
    set.intermediates[static_cast<std::size_t>(i)].push_back(hyp);
    for (int j = 0; j < model.cfg.layers; ++j) {
      hyp = decode_layer(model, j, query, hyp, grid).next;
      set.intermediates[static_cast<std::size_t>(i)].push_back(hyp);
    }
    set.trajectories.push_back(hyp);
  }
  return set;
}

Scalar mean_l1(const Trajectory& a, const Trajectory& b) {
  Scalar sum = 0.0;
  const int t_count = a.steps();
  for (int t = 0; t < t_count; ++t) {
    const Pose2& pa = a.poses[static_cast<std::size_t>(t)];
    const Pose2& pb = b.poses[static_cast<std::size_t>(t)];
    sum += std::abs(pa.x - pb.x) + std::abs(pa.y - pb.y) +
           std::abs(wrap_angle(pa.yaw - pb.yaw));
  }
  return sum / (3.0 * t_count);
}

namespace {

// Forward + backward + SGD for one scenario; returns the loss.
Scalar train_step(DecoderModel& model, const scene::Scenario& s, const bev::BevGrid& grid,
                  const anchors::AnchorDictionary& dict, Scalar lr) {
  const int winner = anchors::nearest_anchor(dict, s.human_trajectory);
  const Trajectory& anchor = dict.anchors[static_cast<std::size_t>(winner)];
  const int t_count = model.steps;
  const int layers = model.cfg.layers;

  nn::MlpCache enc_cache;
  const Vec query = nn::mlp_forward(model.params, "trajenc", model.trajenc_spec(),
                                    trajenc_input(model, anchor), &enc_cache);
  std::vector<LayerResult> results;
  results.reserve(static_cast<std::size_t>(layers));
  Trajectory hyp = anchor;
  for (int j = 0; j < layers; ++j) {
    results.push_back(decode_layer(model, j, query, hyp, grid, /*want_cache=*/true));
    hyp = results.back().next;
  }
  const Scalar loss = mean_l1(hyp, s.human_trajectory);

  // d(loss)/d(final pose coordinates); the clip and the telescoped sum make
  // every layer's raw offset see the same upstream gradient where unclipped.
  const Scalar norm = 1.0 / (3.0 * t_count);
  Vec dfinal(3 * t_count);
  for (int t = 0; t < t_count; ++t) {
    const Pose2& p = hyp.poses[static_cast<std::size_t>(t)];
    const Pose2& h = s.human_trajectory.poses[static_cast<std::size_t>(t)];
    const auto sgn = [](Scalar v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    dfinal(3 * t) = sgn(p.x - h.x) * norm;
    dfinal(3 * t + 1) = sgn(p.y - h.y) * norm;
    dfinal(3 * t + 2) = sgn(wrap_angle(p.yaw - h.yaw)) * norm;
  }

  model.params.zero_grads();
  Vec dquery = Vec::Zero(query.size());
  for (int j = layers - 1; j >= 0; --j) {
    dquery += decode_layer_backward(model, j, results[static_cast<std::size_t>(j)], dfinal);
  }
  nn::mlp_backward(model.params, "trajenc", model.trajenc_spec(), enc_cache, dquery);
  nn::sgd_step(model.params, lr);
  return loss;
}

}  // namespace

std::vector<Scalar> train_decoder(DecoderModel& model,
                                  const std::vector<const scene::Scenario*>& dataset,
                                  const anchors::AnchorDictionary& dict,
                                  const bev::RenderParams& render_params,
                                  const TrainOptions& opts) {
  if (dataset.empty()) throw std::invalid_argument("train_decoder: empty dataset");

  // Canonical visiting basis: sort by scenario id (stable, repeats adjacent).
  std::vector<const scene::Scenario*> ordered = dataset;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const scene::Scenario* a, const scene::Scenario* b) { return a->id < b->id; });

  std::map<const scene::Scenario*, bev::BevGrid> grids;
  for (const scene::Scenario* s : ordered) {
    if (!grids.count(s)) grids.emplace(s, bev::render_bev(*s, render_params));
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
      const scene::Scenario* s = ordered[idx];
      const bev::BevGrid& base = grids.at(s);
      if (opts.gridmask_prob > 0.0) {
        const bev::BevGrid masked =
            bev::grid_mask(base, opts.gridmask_prob, mask_rng.next_u64(), opts.gridmask);
        history.push_back(train_step(model, *s, masked, dict, opts.lr));
      } else {
        history.push_back(train_step(model, *s, base, dict, opts.lr));
      }
      ++updates;
    }
  }
  return history;
}

}  // namespace bevplan::decoder
