#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "freqseg/boundary_refine.hpp"
#include "freqseg/gradcheck.hpp"

using namespace freqseg;

namespace {

Tensor randn(Rng& rng, int b, int c, int h, int w) {
  Tensor t(b, c, h, w);
  for (double& v : t.data) v = rng.normal();
  return t;
}

BoundaryRefineConfig cfg8(int tokens = 1) {
  BoundaryRefineConfig cfg;
  cfg.channels = 8;
  cfg.reduced = 4;
  cfg.heads = 2;
  cfg.proto_tokens = tokens;
  cfg.distill_hidden = 16;
  return cfg;
}

} // namespace

TEST_SUITE("boundary_refine") {

TEST_CASE("prototype is 64-dimensional and batch-shaped") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(61);
  mod.init(ps, rng);
  Tensor hf = randn(rng, 3, 4, 4, 4), hc = randn(rng, 3, 4, 4, 4);
  Tensor proto = mod.distill(hf, hc, ps);
  CHECK(proto.b == 3);
  CHECK(proto.c == 64); // the prototype dimension
  CHECK(proto.h == 1);  // one token
  CHECK(proto.all_finite());
}

TEST_CASE("zero high-frequency input reduces to the distiller bias path") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(62);
  mod.init(ps, rng);
  Tensor zero(1, 4, 4, 4);
  Tensor proto = mod.distill(zero, zero, ps);

  // expected: fc2(relu(fc1(0))) with pooled zeros
  Tensor pooled(1, 8, 1, 1);
  Tensor h = relu(conv2d(pooled, ps.value("fgbr.distill.fc1.w"), ps.value("fgbr.distill.fc1.b"),
                         1, 0));
  Tensor expect = conv2d(h, ps.value("fgbr.distill.fc2.w"), ps.value("fgbr.distill.fc2.b"), 1, 0);
  for (int j = 0; j < 64; ++j)
    CHECK(proto.at(0, j, 0, 0) == expect.at(0, j, 0, 0));
}

TEST_CASE("prototype is invariant to spatial permutation of the inputs") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(63);
  mod.init(ps, rng);
  Tensor hf = randn(rng, 1, 4, 4, 4), hc = randn(rng, 1, 4, 4, 4);
  Tensor p1 = mod.distill(hf, hc, ps);

  // one fixed permutation applied to every channel of both inputs
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  Rng prng(64);
  prng.shuffle(perm);
  Tensor hf2 = hf, hc2 = hc;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 16; ++i) {
      hf2.plane(0, c)[i] = hf.plane(0, c)[perm[i]];
      hc2.plane(0, c)[i] = hc.plane(0, c)[perm[i]];
    }
  Tensor p2 = mod.distill(hf2, hc2, ps);
  for (int j = 0; j < 64; ++j)
    CHECK(p1.at(0, j, 0, 0) ==
          doctest::Approx(p2.at(0, j, 0, 0)).epsilon(1e-12)); // up to summation rounding
}

TEST_CASE("different batch items produce different prototypes") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(65);
  mod.init(ps, rng);
  Tensor hf = randn(rng, 2, 4, 4, 4), hc = randn(rng, 2, 4, 4, 4);
  Tensor proto = mod.distill(hf, hc, ps);
  double diff = 0.0;
  for (int j = 0; j < 64; ++j)
    diff += std::abs(proto.at(0, j, 0, 0) - proto.at(1, j, 0, 0));
  CHECK(diff > 1e-6);
}

TEST_CASE("distill rejects mismatched input shapes") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(66);
  mod.init(ps, rng);
  CHECK_THROWS_AS(mod.distill(Tensor(1, 4, 4, 4), Tensor(1, 4, 2, 2), ps), std::invalid_argument);
}

TEST_CASE("zero residual weight degenerates to the identity, bitwise") {
  BoundaryRefineConfig cfg = cfg8();
  cfg.omega0 = 0.0;
  BoundaryRefiner mod(cfg);
  ParamStore ps;
  Rng rng(67);
  mod.init(ps, rng);
  Tensor x = randn(rng, 2, 8, 4, 4);
  Tensor hf = randn(rng, 2, 4, 4, 4), hc = randn(rng, 2, 4, 4, 4);
  BoundaryRefineOut out = mod.forward(x, hf, hc, ps);
  CHECK(out.refined.data == x.data);
}

TEST_CASE("single-token attention weights are identically one") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(68);
  mod.init(ps, rng);
  Tensor x = randn(rng, 2, 8, 4, 4);
  Tensor hf = randn(rng, 2, 4, 4, 4), hc = randn(rng, 2, 4, 4, 4);
  mod.forward(x, hf, hc, ps);
  const Tensor& w = mod.attention_weights();
  CHECK(w.w == 1); // one token
  for (double v : w.data) CHECK(std::abs(v - 1.0) <= 1e-15);
}

TEST_CASE("multi-token softmax rows sum to one") {
  BoundaryRefiner mod(cfg8(3));
  ParamStore ps;
  Rng rng(69);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 4, 4);
  Tensor hf = randn(rng, 1, 4, 4, 4), hc = randn(rng, 1, 4, 4, 4);
  mod.forward(x, hf, hc, ps);
  const Tensor& w = mod.attention_weights();
  CHECK(w.w == 3);
  for (int hd = 0; hd < 2; ++hd)
    for (int p = 0; p < 16; ++p) {
      double s = 0.0;
      for (int t = 0; t < 3; ++t) s += w.at(0, hd, p, t);
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("output shape equals input shape") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(70);
  mod.init(ps, rng);
  Tensor x = randn(rng, 2, 8, 4, 8);
  Tensor hf = randn(rng, 2, 4, 4, 8), hc = randn(rng, 2, 4, 4, 8);
  CHECK(mod.forward(x, hf, hc, ps).refined.same_shape(x));
}

TEST_CASE("gradient check over all parameters (single token)") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(71);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 4, 4);
  Tensor hf = randn(rng, 1, 4, 4, 4), hc = randn(rng, 1, 4, 4, 4);
  Tensor wts = randn(rng, 1, 8, 4, 4);

  auto compute = [&](bool with_grad) {
    BoundaryRefineOut out = mod.forward(x, hf, hc, ps);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.refined.size(); ++i)
      acc += wts.data[i] * out.refined.data[i] * out.refined.data[i];
    if (with_grad) {
      Tensor g(1, 8, 4, 4);
      for (std::size_t i = 0; i < g.size(); ++i)
        g.data[i] = 2.0 * wts.data[i] * out.refined.data[i];
      mod.backward(g, ps);
    }
    return acc;
  };
  auto loss = [&]() { return compute(false); };
  auto loss_and_grad = [&]() { return compute(true); };
  GradCheckReport rep = grad_check(loss, loss_and_grad, ps, 1e-5, 1e-4);
  INFO(rep.summary());
  CHECK(rep.all_pass);
}

TEST_CASE("gradient check with two tokens exercises the softmax backward") {
  BoundaryRefiner mod(cfg8(2));
  ParamStore ps;
  Rng rng(72);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 4, 4);
  Tensor hf = randn(rng, 1, 4, 4, 4), hc = randn(rng, 1, 4, 4, 4);
  Tensor wts = randn(rng, 1, 8, 4, 4);

  auto compute = [&](bool with_grad) {
    BoundaryRefineOut out = mod.forward(x, hf, hc, ps);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.refined.size(); ++i)
      acc += wts.data[i] * out.refined.data[i] * out.refined.data[i];
    if (with_grad) {
      Tensor g(1, 8, 4, 4);
      for (std::size_t i = 0; i < g.size(); ++i)
        g.data[i] = 2.0 * wts.data[i] * out.refined.data[i];
      mod.backward(g, ps);
    }
    return acc;
  };
  auto loss = [&]() { return compute(false); };
  auto loss_and_grad = [&]() { return compute(true); };
  GradCheckReport rep = grad_check(loss, loss_and_grad, ps, 1e-5, 1e-4);
  INFO(rep.summary());
  CHECK(rep.all_pass);
}

TEST_CASE("input gradients reach both high-frequency sources") {
  BoundaryRefiner mod(cfg8());
  ParamStore ps;
  Rng rng(73);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 4, 4);
  Tensor hf = randn(rng, 1, 4, 4, 4), hc = randn(rng, 1, 4, 4, 4);
  mod.forward(x, hf, hc, ps);
  BoundaryRefiner::Grads g = mod.backward(Tensor(1, 8, 4, 4, 1.0), ps);
  CHECK(g.features.same_shape(x));
  CHECK(g.high_fine.same_shape(hf));
  CHECK(g.high_coarse.same_shape(hc));
  double mag_hf = 0.0, mag_hc = 0.0;
  for (double v : g.high_fine.data) mag_hf += std::abs(v);
  for (double v : g.high_coarse.data) mag_hc += std::abs(v);
  CHECK(mag_hf > 0.0);
  CHECK(mag_hc > 0.0);
}

} // TEST_SUITE
