#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "freqseg/freq_enhance.hpp"
#include "freqseg/gradcheck.hpp"
#include "freqseg/optimizer.hpp"

using namespace freqseg;

namespace {

Tensor randn(Rng& rng, int b, int c, int h, int w) {
  Tensor t(b, c, h, w);
  for (double& v : t.data) v = rng.normal();
  return t;
}

FreqEnhanceConfig cfg8(double fusion = 0.3) {
  FreqEnhanceConfig cfg;
  cfg.channels = 8;
  cfg.fusion = fusion;
  return cfg;
}

} // namespace

TEST_SUITE("freq_enhance") {

TEST_CASE("zero fusion weight degenerates to the identity, bitwise") {
  FrequencyEnhancer mod(cfg8(0.0));
  ParamStore ps;
  Rng rng(41);
  mod.init(ps, rng);
  Tensor x = randn(rng, 2, 8, 8, 8);
  FreqEnhanceOut out = mod.forward(x, ps);
  CHECK(out.enhanced.data == x.data);

  // and the input gradient collapses to the upstream gradient alone
  Tensor g_enh = randn(rng, 2, 8, 8, 8);
  Tensor zero_hf(2, 4, 8, 8), zero_hc(2, 4, 8, 8);
  Tensor gx = mod.backward(g_enh, zero_hf, zero_hc, ps);
  CHECK(gx.data == g_enh.data);
}

TEST_CASE("shape contracts and preconditions") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(42);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 8, 12);
  FreqEnhanceOut out = mod.forward(x, ps);
  CHECK(out.enhanced.same_shape(x));
  CHECK(out.high_fine.b == 1);
  CHECK(out.high_fine.c == 4);
  CHECK(out.high_fine.h == 8);
  CHECK(out.high_fine.w == 12);
  CHECK(out.high_coarse.same_shape(out.high_fine));
  CHECK(out.low.same_shape(out.high_fine));
  CHECK(out.attn_boundary.c == 1);
  CHECK(out.attn_boundary.h == 8);

  CHECK_THROWS_AS(mod.forward(Tensor(1, 8, 6, 8), ps), std::invalid_argument); // 6 % 4 != 0
  CHECK_THROWS_AS(mod.forward(Tensor(1, 8, 2, 4), ps), std::invalid_argument); // below minimum
}

TEST_CASE("attention maps live strictly inside (0,1)") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(43);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 8, 8);
  FreqEnhanceOut out = mod.forward(x, ps);
  for (double v : out.attn_boundary.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  for (double v : out.attn_structure.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("constant input gives a spatially constant boundary attention") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(44);
  mod.init(ps, rng);
  Tensor x(1, 8, 8, 8, 0.7);
  FreqEnhanceOut out = mod.forward(x, ps);
  // constant input -> zero detail bands -> bias-only high path -> flat map
  const double first = out.attn_boundary.data[0];
  for (double v : out.attn_boundary.data) CHECK(v == doctest::Approx(first).epsilon(1e-12));
}

TEST_CASE("attention forced to one scales the input by 1 + fusion") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(45);
  mod.init(ps, rng);
  // saturate both attention sigmoids
  ps.value("mfea.battn.conv2.b").data[0] = 1000.0;
  ps.value("mfea.sattn.conv2.b").data[0] = 1000.0;
  for (double& v : ps.value("mfea.battn.conv2.w").data) v = 0.0;
  for (double& v : ps.value("mfea.sattn.conv2.w").data) v = 0.0;

  Tensor x = randn(rng, 1, 8, 8, 8);
  FreqEnhanceOut out = mod.forward(x, ps);
  // alpha*1 + beta*1 = 1, so enhanced = 1.3 * x
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(out.enhanced.data[i] == doctest::Approx(1.3 * x.data[i]).epsilon(1e-12));
}

TEST_CASE("boundedness of the residual modulation") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(46);
  mod.init(ps, rng);
  Tensor x = randn(rng, 2, 8, 8, 8);
  FreqEnhanceOut out = mod.forward(x, ps);
  double max_x = 0.0, max_diff = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    max_x = std::max(max_x, std::abs(x.data[i]));
    max_diff = std::max(max_diff, std::abs(out.enhanced.data[i] - x.data[i]));
  }
  const double alpha = ps.value("mfea.alpha").data[0];
  const double beta = ps.value("mfea.beta").data[0];
  CHECK(max_diff <= 0.3 * (alpha + beta) * max_x);
}

TEST_CASE("fusion weight is a fixed constant, not a parameter") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(47);
  mod.init(ps, rng);
  CHECK_FALSE(ps.has("mfea.lambda"));
  CHECK(ps.has("mfea.alpha"));
  CHECK(ps.value("mfea.alpha").data[0] == 0.5);
  CHECK(ps.value("mfea.beta").data[0] == 0.5);
}

TEST_CASE("alpha gradient equals fusion * sum(x (.) A_b)") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(48);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 8, 8);
  ps.zero_grads();
  FreqEnhanceOut out = mod.forward(x, ps);
  // L = sum(enhanced): upstream gradient of ones
  Tensor ones(1, 8, 8, 8, 1.0);
  Tensor zero_hf(1, 4, 8, 8), zero_hc(1, 4, 8, 8);
  mod.backward(ones, zero_hf, zero_hc, ps);

  double expect = 0.0; // fusion * sum over channels and pixels of x * A_b
  for (int c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < x.plane_size(); ++i)
      expect += 0.3 * x.plane(0, c)[i] * out.attn_boundary.plane(0, 0)[i];
  CHECK(ps.grad("mfea.alpha").data[0] == doctest::Approx(expect).epsilon(1e-10));

  // finite-difference cross-check on alpha
  const double eps = 1e-6;
  auto loss = [&]() {
    double acc = 0.0;
    for (double v : mod.forward(x, ps).enhanced.data) acc += v;
    return acc;
  };
  double& alpha = ps.value("mfea.alpha").data[0];
  const double orig = alpha;
  alpha = orig + eps;
  const double lp = loss();
  alpha = orig - eps;
  const double lm = loss();
  alpha = orig;
  CHECK((lp - lm) / (2 * eps) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("full module gradient check, including alpha and beta") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(49);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 8, 8);
  Tensor wts_e = randn(rng, 1, 8, 8, 8);
  Tensor wts_hf = randn(rng, 1, 4, 8, 8);
  Tensor wts_hc = randn(rng, 1, 4, 8, 8);

  // scalar loss touching all three outputs downstream consumers would use
  auto compute = [&](bool with_grad) {
    FreqEnhanceOut out = mod.forward(x, ps);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.enhanced.size(); ++i)
      acc += wts_e.data[i] * out.enhanced.data[i];
    for (std::size_t i = 0; i < out.high_fine.size(); ++i)
      acc += wts_hf.data[i] * out.high_fine.data[i] + wts_hc.data[i] * out.high_coarse.data[i];
    if (with_grad) mod.backward(wts_e, wts_hf, wts_hc, ps);
    return acc;
  };
  auto loss = [&]() { return compute(false); };
  auto loss_and_grad = [&]() { return compute(true); };
  GradCheckReport rep = grad_check(loss, loss_and_grad, ps, 1e-5, 1e-4);
  INFO(rep.summary());
  CHECK(rep.all_pass);
}

TEST_CASE("input gradient flows through direct, modulation and wavelet paths") {
  FrequencyEnhancer mod(cfg8());
  ParamStore ps;
  Rng rng(50);
  mod.init(ps, rng);
  Tensor x = randn(rng, 1, 8, 8, 8);
  mod.forward(x, ps);

  Tensor ones(1, 8, 8, 8, 1.0);
  Tensor zero_e(1, 8, 8, 8), zero_hf(1, 4, 8, 8), zero_hc(1, 4, 8, 8);

  // direct + modulation: upstream only on enhanced
  Tensor g_direct = mod.backward(ones, zero_hf, zero_hc, ps);
  double mag_direct = 0.0;
  for (double v : g_direct.data) mag_direct += std::abs(v);
  CHECK(mag_direct > 0.0);

  // wavelet path alone: upstream only on the fine high-frequency output
  Tensor wts_hf(1, 4, 8, 8, 1.0);
  Tensor g_wavelet = mod.backward(zero_e, wts_hf, zero_hc, ps);
  double mag_wavelet = 0.0;
  for (double v : g_wavelet.data) mag_wavelet += std::abs(v);
  CHECK(mag_wavelet > 0.0);

  // coarse path alone
  Tensor wts_hc(1, 4, 8, 8, 1.0);
  Tensor g_coarse = mod.backward(zero_e, zero_hf, wts_hc, ps);
  double mag_coarse = 0.0;
  for (double v : g_coarse.data) mag_coarse += std::abs(v);
  CHECK(mag_coarse > 0.0);
}

// Trend: after a short edge-supervised training run the boundary attention
// peaks near the step edge at least as often as it does at random init
// (5 seeds).
TEST_CASE("boundary attention learns to fire near a step edge") {
  // the step must straddle a 2x2 block or the detail bands cannot see it:
  // columns 3..7 are 1, so the block over columns (2,3) carries the response
  Tensor x(1, 8, 8, 8);
  for (int c = 0; c < 8; ++c)
    for (int y = 0; y < 8; ++y)
      for (int xx = 3; xx < 8; ++xx) x.at(0, c, y, xx) = 1.0;
  Tensor target(1, 1, 8, 8);
  for (int y = 0; y < 8; ++y) {
    target.at(0, 0, y, 2) = 1.0;
    target.at(0, 0, y, 3) = 1.0;
  }

  auto argmax_col_in_window = [](const Tensor& attn) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < attn.size(); ++i)
      if (attn.data[i] > attn.data[best]) best = i;
    const int col = static_cast<int>(best % 8);
    return col >= 1 && col <= 4; // edge columns plus one band-pixel
  };

  int hits_init = 0, hits_trained = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FrequencyEnhancer mod(cfg8());
    ParamStore ps;
    Rng rng(1000 + seed);
    mod.init(ps, rng);

    hits_init += argmax_col_in_window(mod.forward(x, ps).attn_boundary);

    AdamConfig ac;
    ac.lr0 = 1e-2;
    ac.decay = 1.0;
    Adam adam(ac);
    Tensor zero_hf(1, 4, 8, 8), zero_hc(1, 4, 8, 8), zero_e(1, 8, 8, 8);
    for (int step = 0; step < 50; ++step) {
      ps.zero_grads();
      FreqEnhanceOut out = mod.forward(x, ps);
      Tensor g_attn(1, 1, 8, 8);
      for (std::size_t i = 0; i < g_attn.size(); ++i)
        g_attn.data[i] = 2.0 * (out.attn_boundary.data[i] - target.data[i]) / 64.0;
      mod.backward(zero_e, zero_hf, zero_hc, ps, g_attn);
      adam.step(ps, 0);
    }
    hits_trained += argmax_col_in_window(mod.forward(x, ps).attn_boundary);
  }
  INFO("hits at init: ", hits_init, ", after training: ", hits_trained);
  CHECK(hits_trained >= hits_init);
  CHECK(hits_trained >= 4); // training should place the peak at the edge almost always
}

} // TEST_SUITE
