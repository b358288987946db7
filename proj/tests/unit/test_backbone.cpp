#include <doctest.h>

#include <stdexcept>

#include "freqseg/backbone.hpp"
#include "freqseg/gradcheck.hpp"

using namespace freqseg;

namespace {

Tensor randn(Rng& rng, int b, int c, int h, int w) {
  Tensor t(b, c, h, w);
  for (double& v : t.data) v = rng.normal();
  return t;
}

BackboneConfig small_cfg() {
  BackboneConfig cfg;
  cfg.patch = 4;
  cfg.embed_dim = 8;
  cfg.depth = 2;
  cfg.adapter_dim = 2;
  return cfg;
}

} // namespace

TEST_SUITE("backbone") {

TEST_CASE("output grid is image size over patch") {
  BackboneConfig cfg; // defaults: patch 16, C 64
  PatchEncoder enc(cfg);
  ParamStore ps;
  Rng rng(31);
  enc.init(ps, rng);

  Tensor img(1, 1, 64, 64, 0.5);
  Tensor f = enc.forward(img, ps);
  CHECK(f.b == 1);
  CHECK(f.c == 64);
  CHECK(f.h == 4);
  CHECK(f.w == 4);

  Tensor big(1, 1, 512, 512, 0.25);
  Tensor fb = enc.forward(big, ps);
  CHECK(fb.h == 32);
  CHECK(fb.w == 32);
}

TEST_CASE("indivisible dimensions raise a configuration error") {
  PatchEncoder enc(small_cfg());
  ParamStore ps;
  Rng rng(32);
  enc.init(ps, rng);
  CHECK_THROWS_WITH_AS(enc.forward(Tensor(1, 1, 10, 12), ps),
                       doctest::Contains("divisible by patch"), std::invalid_argument);
}

TEST_CASE("zero-initialized adapter leaves the frozen body output untouched at init") {
  PatchEncoder enc(small_cfg());
  ParamStore ps;
  Rng rng(33);
  enc.init(ps, rng);
  Tensor img = randn(rng, 2, 1, 8, 8);
  Tensor out = enc.forward(img, ps);

  // body-only replica from the stored weights
  Tensor x = conv2d(img, ps.value("backbone.patch_embed.w"), ps.value("backbone.patch_embed.b"),
                    4, 0);
  for (int i = 0; i < 2; ++i) {
    const std::string p = "backbone.block" + std::to_string(i);
    Tensor h = conv2d(x, ps.value(p + ".mix3.w"), ps.value(p + ".mix3.b"), 1, 1);
    h = conv2d(h, ps.value(p + ".mix1.w"), ps.value(p + ".mix1.b"), 1, 0);
    x = relu(h);
  }
  CHECK(out.data == x.data);
}

TEST_CASE("frozen body gets exactly zero gradients, adapters train") {
  PatchEncoder enc(small_cfg());
  ParamStore ps;
  Rng rng(34);
  enc.init(ps, rng);
  // give the zero-init up-projections signal so adapter gradients flow
  for (auto& [name, p] : ps)
    if (p.trainable)
      for (double& v : p.value.data) v += 0.05;
  Tensor img = randn(rng, 1, 1, 8, 8);
  ps.zero_grads();
  Tensor f = enc.forward(img, ps);
  enc.backward(Tensor(f.b, f.c, f.h, f.w, 1.0), ps);

  double adapter_grad_mag = 0.0;
  for (const auto& [name, p] : ps) {
    if (!p.trainable) {
      for (double g : p.grad.data) CHECK(g == 0.0);
    } else {
      for (double g : p.grad.data) adapter_grad_mag += std::abs(g);
    }
  }
  CHECK(adapter_grad_mag > 0.0);
}

TEST_CASE("adapters stay under 10% of body parameters at defaults") {
  BackboneConfig cfg; // patch 16, C 64, depth 2, adapter 16
  PatchEncoder enc(cfg);
  CHECK(enc.adapter_param_count() * 10 < enc.body_param_count());
}

TEST_CASE("deterministic under a fixed seed") {
  Tensor img;
  {
    Rng rng(35);
    img = randn(rng, 1, 1, 8, 8);
  }
  auto run = [&img]() {
    PatchEncoder enc(small_cfg());
    ParamStore ps;
    Rng rng(99);
    enc.init(ps, rng);
    return enc.forward(img, ps);
  };
  Tensor a = run(), b = run();
  CHECK(a.data == b.data);
}

TEST_CASE("adapter gradients pass the finite-difference check") {
  PatchEncoder enc(small_cfg());
  ParamStore ps;
  Rng rng(36);
  enc.init(ps, rng);
  for (auto& [name, p] : ps)
    if (p.trainable)
      for (double& v : p.value.data) v += rng.normal(0.0, 0.05);

  Tensor img = randn(rng, 1, 1, 8, 8);
  Tensor wts = randn(rng, 1, 8, 2, 2);
  auto loss = [&]() {
    Tensor f = enc.forward(img, ps);
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += wts.data[i] * f.data[i] * f.data[i];
    return acc;
  };
  auto loss_and_grad = [&]() {
    Tensor f = enc.forward(img, ps);
    double acc = 0.0;
    Tensor gf(f.b, f.c, f.h, f.w);
    for (std::size_t i = 0; i < f.size(); ++i) {
      acc += wts.data[i] * f.data[i] * f.data[i];
      gf.data[i] = 2.0 * wts.data[i] * f.data[i];
    }
    enc.backward(gf, ps);
    return acc;
  };
  GradCheckReport rep = grad_check(loss, loss_and_grad, ps, 1e-5, 1e-4);
  INFO(rep.summary());
  CHECK(rep.all_pass);
}

} // TEST_SUITE
