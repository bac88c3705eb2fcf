// Minimal neural toolkit: named parameter store, linear/MLP layers,
// single-head scaled dot-product attention, sinusoidal positional encoding,
// SGD. Every differentiable op pairs a forward (with explicit cache) and a
// hand-written backward, so all gradients stay checkable against finite
// differences. No autodiff graph.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bevplan/types.hpp"

namespace bevplan::nn {

struct Param {
  Mat value;
  Mat grad;  // same shape, accumulated by backward passes
};

class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed) : seed_(seed) {}

  // Registers a parameter initialized uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  // Initialization depends only on (store seed, name), so registration order
  // does not matter. fan_in <= 0 initializes to zero. Throws on duplicates.
  Mat& add(const std::string& name, int rows, int cols, int fan_in);

  const Mat& value(const std::string& name) const;
  Mat& mutable_value(const std::string& name);
  Mat& grad(const std::string& name);

  bool has(const std::string& name) const { return params_.count(name) > 0; }
  std::size_t size() const { return params_.size(); }
  std::uint64_t seed() const { return seed_; }

  void zero_grads();

  // Sorted by name; deterministic iteration order for updates and I/O.
  const std::map<std::string, Param>& all() const { return params_; }
  std::map<std::string, Param>& all() { return params_; }

 private:
  std::map<std::string, Param> params_;
  std::uint64_t seed_;
};

// p <- p - lr * g for every parameter.
void sgd_step(ParamStore& store, Scalar lr);

// ---- linear: y = W x + b, params "<prefix>.W" (out x in), "<prefix>.b" ----

void add_linear(ParamStore& store, const std::string& prefix, int out, int in);
Vec linear_forward(const ParamStore& store, const std::string& prefix, const Vec& x);
// Accumulates dW, db; returns dx.
Vec linear_backward(ParamStore& store, const std::string& prefix, const Vec& x,
                    const Vec& dy);

// ---- MLP: affine+ReLU per hidden layer, final layer linear ----

struct MlpSpec {
  std::vector<int> sizes;  // {in, hidden..., out}, at least 2 entries
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
};

struct MlpCache {
  std::vector<Vec> xs;  // xs[0] = input, xs[i] = output of layer i-1
};

void add_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec);
Vec mlp_forward(const ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                const Vec& x, MlpCache* cache = nullptr);
// Accumulates parameter grads; returns the input gradient.
Vec mlp_backward(ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                 const MlpCache& cache, const Vec& dout);

// ---- single-query scaled dot-product attention ----
// out = softmax(q K^T / sqrt(d)) V with q: d, K,V: T x d rows.

struct AttnCache {
  Vec q;
  Mat k, v;
  Vec weights;  // softmax output, sums to 1
};

Vec attention(const Vec& q, const Mat& k, const Mat& v, AttnCache* cache = nullptr);
void attention_backward(const AttnCache& cache, const Vec& dout, Vec* dq, Mat* dk,
                        Mat* dv);

// ---- sinusoidal positional encoding, d even, values in [-1, 1] ----
Vec positional_encoding(int t_index, int d);

inline Scalar sigmoid(Scalar z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---- checkpoint: JSON manifest + little-endian float32 blob ----
// save() writes "<base>.json" and "<base>.bin"; load() reads them back
// (values round-trip through float32).
void save_checkpoint(const ParamStore& store, const std::string& base_path);
ParamStore load_checkpoint(const std::string& base_path);

}  // namespace bevplan::nn
