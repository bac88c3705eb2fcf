#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bevplan/nn/core.hpp"
#include "bevplan/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/test_util.hpp"

using namespace bevplan;
using nn::MlpSpec;
using nn::ParamStore;

namespace {

Vec random_vec(int n, Rng& rng, double amp = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-amp, amp);
  return v;
}

Mat random_mat(int r, int c, Rng& rng, double amp = 1.0) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-amp, amp);
  }
  return m;
}

}  // namespace

TEST_CASE("parameter store: registration, init determinism, duplicates") {
  ParamStore a(7), b(7), c(8);
  a.add("w", 4, 3, 3);
  b.add("w", 4, 3, 3);
  c.add("w", 4, 3, 3);
  CHECK(a.value("w") == b.value("w"));
  CHECK(a.value("w") != c.value("w"));
  CHECK(a.value("w").cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(3.0));
  CHECK_THROWS_AS(a.add("w", 2, 2, 2), std::invalid_argument);
  // Registration order does not change initialization.
  ParamStore d(7);
  d.add("other", 2, 2, 2);
  d.add("w", 4, 3, 3);
  CHECK(d.value("w") == a.value("w"));
}

TEST_CASE("mlp zero weights give zero output; identity layer passes through") {
  const MlpSpec spec{{3, 3}};
  ParamStore zero(1);
  nn::add_mlp(zero, "m", spec);
  zero.mutable_value("m.L0.W").setZero();
  zero.mutable_value("m.L0.b").setZero();
  Rng rng(2);
  CHECK(nn::mlp_forward(zero, "m", spec, random_vec(3, rng)).isZero(0.0));

  ParamStore ident(1);
  nn::add_mlp(ident, "m", spec);
  ident.mutable_value("m.L0.W").setIdentity();
  ident.mutable_value("m.L0.b").setZero();
  const Vec x = random_vec(3, rng);
  CHECK((nn::mlp_forward(ident, "m", spec, x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp parameter and input gradients match finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = rng.uniform_int(2, 6);
    const int hidden = rng.uniform_int(2, 8);
    const int out = rng.uniform_int(1, 5);
    const MlpSpec spec{{in, hidden, out}};
    ParamStore store(static_cast<std::uint64_t>(trial) + 100);
    nn::add_mlp(store, "m", spec);
    const Vec x = random_vec(in, rng);
    const Vec r = random_vec(out, rng);  // fixed readout makes the loss scalar

    nn::MlpCache cache;
    const Vec y = nn::mlp_forward(store, "m", spec, x, &cache);
    store.zero_grads();
    const Vec dx = nn::mlp_backward(store, "m", spec, cache, r);
    (void)y;

    const auto loss = [&](const ParamStore& p) {
      return r.dot(nn::mlp_forward(p, "m", spec, x));
    };
    const auto res = testutil::check_param_grads(store, loss);
    CAPTURE(res.worst);
    CHECK(res.max_rel_error < 1e-4);

    const Vec dx_num = testutil::numeric_input_grad(
        [&](const Vec& xv) { return r.dot(nn::mlp_forward(store, "m", spec, xv)); }, x);
    for (int i = 0; i < in; ++i) {
      CHECK(testutil::rel_error(dx(i), dx_num(i)) < 1e-4);
    }
  }
}

TEST_CASE("attention trivial cases") {
  Rng rng(5);
  // T = 1: output equals the single value row regardless of q and k.
  const Vec q = random_vec(4, rng);
  const Mat k1 = random_mat(1, 4, rng);
  const Mat v1 = random_mat(1, 4, rng);
  CHECK((nn::attention(q, k1, v1) - v1.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-15);

  // Identical key rows: uniform weights, output is the mean of values.
  Mat k(3, 4);
  k << random_vec(4, rng).transpose().replicate(3, 1);
  const Mat v = random_mat(3, 4, rng);
  const Vec out = nn::attention(q, k, v);
  const Vec mean = v.colwise().mean().transpose();
  CHECK((out - mean).cwiseAbs().maxCoeff() < 1e-12);

  // Weights are a probability vector.
  nn::AttnCache cache;
  nn::attention(q, random_mat(5, 4, rng), random_mat(5, 4, rng), &cache);
  CHECK(cache.weights.minCoeff() >= 0.0);
  CHECK(cache.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("attention gradients match finite differences") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.uniform_int(2, 6);
    const int t = rng.uniform_int(1, 7);
    const Vec q = random_vec(d, rng);
    const Mat k = random_mat(t, d, rng);
    const Mat v = random_mat(t, d, rng);
    const Vec r = random_vec(d, rng);

    nn::AttnCache cache;
    nn::attention(q, k, v, &cache);
    Vec dq;
    Mat dk, dv;
    nn::attention_backward(cache, r, &dq, &dk, &dv);

    const Vec dq_num = testutil::numeric_input_grad(
        [&](const Vec& qv) { return r.dot(nn::attention(qv, k, v)); }, q);
    for (int i = 0; i < d; ++i) CHECK(testutil::rel_error(dq(i), dq_num(i)) < 1e-4);

    for (int row = 0; row < t; ++row) {
      for (int col = 0; col < d; ++col) {
        Mat kk = k;
        const double h = 1e-4;
        kk(row, col) += h;
        const double up = r.dot(nn::attention(q, kk, v));
        kk(row, col) -= 2 * h;
        const double down = r.dot(nn::attention(q, kk, v));
        CHECK(testutil::rel_error(dk(row, col), (up - down) / (2 * h)) < 1e-4);

        Mat vv = v;
        vv(row, col) += h;
        const double vup = r.dot(nn::attention(q, k, vv));
        vv(row, col) -= 2 * h;
        const double vdown = r.dot(nn::attention(q, k, vv));
        CHECK(testutil::rel_error(dv(row, col), (vup - vdown) / (2 * h)) < 1e-4);
      }
    }
  }
}

TEST_CASE("positional encoding shape and bounds") {
  const Vec pe0 = nn::positional_encoding(0, 8);
  for (int i = 0; i < 8; i += 2) {
    CHECK(pe0(i) == 0.0);
    CHECK(pe0(i + 1) == 1.0);
  }
  for (int t = 0; t < 50; ++t) {
    const Vec pe = nn::positional_encoding(t, 16);
    CHECK(pe.cwiseAbs().maxCoeff() <= 1.0);
  }
  // Distinct indices give distinct encodings (enumerated check).
  for (int a = 0; a < 16; ++a) {
    for (int b = a + 1; b <= 16; ++b) {
      const double dist =
          (nn::positional_encoding(a, 16) - nn::positional_encoding(b, 16)).norm();
      CHECK(dist > 1e-6);
    }
  }
  CHECK_THROWS_AS(nn::positional_encoding(0, 3), std::invalid_argument);
}

TEST_CASE("sgd_step and a quadratic convergence run") {
  ParamStore store(1);
  store.add("p", 1, 1, 0);
  store.mutable_value("p")(0, 0) = 1.0;
  store.grad("p")(0, 0) = 2.0;
  nn::sgd_step(store, 0.1);
  CHECK(store.value("p")(0, 0) == doctest::Approx(0.8));

  // Zero grads leave parameters unchanged.
  store.zero_grads();
  const double before = store.value("p")(0, 0);
  nn::sgd_step(store, 0.5);
  CHECK(store.value("p")(0, 0) == before);

  // Minimize 0.5 p^2 from p = 1 at lr 0.1: converges within 200 steps.
  store.mutable_value("p")(0, 0) = 1.0;
  for (int i = 0; i < 200; ++i) {
    store.zero_grads();
    store.grad("p")(0, 0) = store.value("p")(0, 0);
    nn::sgd_step(store, 0.1);
  }
  CHECK(std::abs(store.value("p")(0, 0)) < 1e-3);
  // Closed form: p_k = 0.9^k.
  CHECK(store.value("p")(0, 0) == doctest::Approx(std::pow(0.9, 200)).epsilon(1e-9));
}

TEST_CASE("forward passes are bit-identical on repeated evaluation") {
  Rng rng(11);
  const MlpSpec spec{{5, 7, 3}};
  ParamStore store(55);
  nn::add_mlp(store, "m", spec);
  const Vec x = random_vec(5, rng);
  const Vec y1 = nn::mlp_forward(store, "m", spec, x);
  const Vec y2 = nn::mlp_forward(store, "m", spec, x);
  CHECK(y1 == y2);
  const Vec q = random_vec(3, rng);
  const Mat k = random_mat(4, 3, rng), v = random_mat(4, 3, rng);
  CHECK(nn::attention(q, k, v) == nn::attention(q, k, v));
}

TEST_CASE("checkpoint round-trips through float32") {
  testutil::TempDir dir("nn");
  ParamStore store(321);
  store.add("a.W", 3, 4, 4);
  store.add("a.b", 3, 1, 4);
  store.add("z", 2, 2, 0);
  store.mutable_value("z") << 1.5, -2.25, 0.125, 1e-3;
  nn::save_checkpoint(store, dir.str("ckpt"));
  const ParamStore loaded = nn::load_checkpoint(dir.str("ckpt"));
  CHECK(loaded.seed() == store.seed());
  CHECK(loaded.size() == store.size());
  for (const auto& [name, param] : store.all()) {
    const Mat& got = loaded.value(name);
    REQUIRE(got.rows() == param.value.rows());
    REQUIRE(got.cols() == param.value.cols());
    for (int r = 0; r < got.rows(); ++r) {
      for (int c = 0; c < got.cols(); ++c) {
        CHECK(got(r, c) == static_cast<double>(static_cast<float>(param.value(r, c))));
      }
    }
  }
  // Exactly representable values survive bit-for-bit.
  CHECK(loaded.value("z")(0, 0) == 1.5);
  CHECK(loaded.value("z")(0, 1) == -2.25);
  CHECK(loaded.value("z")(1, 0) == 0.125);
}

TEST_CASE("linear shape mismatch raises") {
  ParamStore store(9);
  nn::add_linear(store, "l", 3, 4);
  Rng rng(1);
  CHECK_THROWS_AS(nn::linear_forward(store, "l", random_vec(5, rng)), std::invalid_argument);
  const MlpSpec spec{{4, 3}};
  CHECK_THROWS_AS(nn::mlp_forward(store, "l", spec, random_vec(3, rng)),
                  std::invalid_argument);
}
