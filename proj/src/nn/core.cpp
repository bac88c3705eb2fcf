#include "bevplan/nn/core.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bevplan/rng.hpp"

namespace bevplan::nn {

using nlohmann::json;

Mat& ParamStore::add(const std::string& name, int rows, int cols, int fan_in) {
  if (params_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  Param p;
  p.value = Mat::Zero(rows, cols);
  p.grad = Mat::Zero(rows, cols);
  if (fan_in > 0) {
    const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
    Rng rng(seed_ ^ fnv1a(name));
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) p.value(r, c) = rng.uniform(-bound, bound);
    }
  }
  return params_.emplace(name, std::move(p)).first->second.value;
}

const Mat& ParamStore::value(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second.value;
}

Mat& ParamStore::mutable_value(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second.value;
}

Mat& ParamStore::grad(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) p.grad.setZero();
}

void sgd_step(ParamStore& store, Scalar lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  for (auto& [name, p] : store.all()) p.value -= lr * p.grad;
}

void add_linear(ParamStore& store, const std::string& prefix, int out, int in) {
  store.add(prefix + ".W", out, in, in);
  store.add(prefix + ".b", out, 1, in);
}

Vec linear_forward(const ParamStore& store, const std::string& prefix, const Vec& x) {
  const Mat& w = store.value(prefix + ".W");
  if (w.cols() != x.size()) throw std::invalid_argument(prefix + ": input size mismatch");
  return w * x + store.value(prefix + ".b").col(0);
}

Vec linear_backward(ParamStore& store, const std::string& prefix, const Vec& x,
                    const Vec& dy) {
  store.grad(prefix + ".W").noalias() += dy * x.transpose();
  store.grad(prefix + ".b").col(0) += dy;
  return store.value(prefix + ".W").transpose() * dy;
}

void add_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec) {
  if (spec.sizes.size() < 2) throw std::invalid_argument("MlpSpec needs >= 2 sizes");
  for (int l = 0; l < spec.layer_count(); ++l) {
    add_linear(store, prefix + ".L" + std::to_string(l), spec.sizes[static_cast<std::size_t>(l + 1)],
               spec.sizes[static_cast<std::size_t>(l)]);
  }
}

Vec mlp_forward(const ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                const Vec& x, MlpCache* cache) {
  if (x.size() != spec.sizes.front()) {
    throw std::invalid_argument(prefix + ": MLP input size mismatch");
  }
  Vec h = x;
  if (cache) {
    cache->xs.clear();
    cache->xs.push_back(h);
  }
  const int layers = spec.layer_count();
  for (int l = 0; l < layers; ++l) {
    h = linear_forward(store, prefix + ".L" + std::to_string(l), h);
    if (l + 1 < layers) h = h.cwiseMax(0.0);
    if (cache) cache->xs.push_back(h);
  }
  return h;
}

Vec mlp_backward(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                 const MlpCache& cache, const Vec& dout) {
  const int layers = spec.layer_count();
  Vec d = dout;
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers) {
      // ReLU: post-activation > 0 iff pre-activation > 0.
      const Vec& post = cache.xs[static_cast<std::size_t>(l + 1)];
      d = (post.array() > 0.0).select(d, Vec::Zero(d.size()));
    }
    d = linear_backward(store, prefix + ".L" + std::to_string(l),
                        cache.xs[static_cast<std::size_t>(l)], d);
  }
  return d;
}

Vec attention(const Vec& q, const Mat& k, const Mat& v, AttnCache* cache) {
  if (k.rows() != v.rows() || k.cols() != q.size() || v.cols() != q.size()) {
    throw std::invalid_argument("attention: shape mismatch");
  }
  const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(q.size()));
  Vec scores = k * q * scale;
  const Scalar m = scores.maxCoeff();
  Vec w = (scores.array() - m).exp();
  w /= w.sum();
  if (cache) {
    cache->q = q;
    cache->k = k;
    cache->v = v;
    cache->weights = w;
  }
  return v.transpose() * w;
}

void attention_backward(const AttnCache& cache, const Vec& dout, Vec* dq, Mat* dk,
                        Mat* dv) {
  const Vec& w = cache.weights;
  const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(cache.q.size()));
  if (dv) *dv = w * dout.transpose();
  const Vec dw = cache.v * dout;
  const Scalar mix = w.dot(dw);
  const Vec ds = w.array() * (dw.array() - mix);
  if (dq) *dq = cache.k.transpose() * ds * scale;
  if (dk) *dk = ds * cache.q.transpose() * scale;
}

Vec positional_encoding(int t_index, int d) {
  if (d <= 0 || d % 2 != 0) throw std::invalid_argument("positional_encoding: d must be even");
  Vec pe(d);
  for (int k = 0; 2 * k < d; ++k) {
    const Scalar freq = std::pow(10000.0, -2.0 * k / static_cast<Scalar>(d));
    pe(2 * k) = std::sin(t_index * freq);
    pe(2 * k + 1) = std::cos(t_index * freq);
  }
  return pe;
}

void save_checkpoint(const ParamStore& store, const std::string& base_path) {
  json manifest;
  manifest["seed"] = store.seed();
  json params = json::array();
  std::ofstream blob(base_path + ".bin", std::ios::binary);
  if (!blob) throw std::runtime_error(base_path + ".bin: cannot open for writing");
  for (const auto& [name, p] : store.all()) {
    params.push_back({{"name", name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
    for (int r = 0; r < p.value.rows(); ++r) {
      for (int c = 0; c < p.value.cols(); ++c) {
        const float f = static_cast<float>(p.value(r, c));
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        const char bytes[4] = {static_cast<char>(bits & 0xFF),
                               static_cast<char>((bits >> 8) & 0xFF),
                               static_cast<char>((bits >> 16) & 0xFF),
                               static_cast<char>((bits >> 24) & 0xFF)};
        blob.write(bytes, 4);
      }
    }
  }
  manifest["params"] = params;
  std::ofstream out(base_path + ".json", std::ios::binary);
  if (!out) throw std::runtime_error(base_path + ".json: cannot open for writing");
  out << manifest.dump(2) << "\n";
}

ParamStore load_checkpoint(const std::string& base_path) {
  std::ifstream in(base_path + ".json");
  if (!in) throw std::runtime_error(base_path + ".json: cannot open file");
  json manifest;
  in >> manifest;
  ParamStore store(manifest.at("seed").get<std::uint64_t>());
  std::ifstream blob(base_path + ".bin", std::ios::binary);
  if (!blob) throw std::runtime_error(base_path + ".bin: cannot open file");
  for (const json& jp : manifest.at("params")) {
    const std::string name = jp.at("name").get<std::string>();
    const int rows = jp.at("rows").get<int>();
    const int cols = jp.at("cols").get<int>();
    Mat& value = store.add(name, rows, cols, 0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        unsigned char bytes[4];
        blob.read(reinterpret_cast<char*>(bytes), 4);
        if (!blob) throw std::runtime_error(base_path + ".bin: truncated blob");
        const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                                   (static_cast<std::uint32_t>(bytes[1]) << 8) |
                                   (static_cast<std::uint32_t>(bytes[2]) << 16) |
                                   (static_cast<std::uint32_t>(bytes[3]) << 24);
        float f;
        std::memcpy(&f, &bits, sizeof(f));
        value(r, c) = static_cast<Scalar>(f);
      }
    }
  }
  return store;
}

}  // namespace bevplan::nn
