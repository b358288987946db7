#include "freqseg/freq_enhance.hpp"

#include <stdexcept>

#include "freqseg/kernels.hpp"

namespace freqseg {

Tensor FrequencyEnhancer::AttnHead::forward(const Tensor& x, ParamStore& ps) {
  pre = conv1.forward(x, ps);
  out = sigmoid(conv2.forward(relu(pre), ps));
  return out;
}

Tensor FrequencyEnhancer::AttnHead::backward(const Tensor& g_attn, ParamStore& ps) {
  Tensor g_z;
  sigmoid_backward(out, g_attn, g_z);
  Tensor g_r = conv2.backward(g_z, ps);
  Tensor g_pre;
  relu_backward(pre, g_r, g_pre);
  return conv1.backward(g_pre, ps);
}

FrequencyEnhancer::FrequencyEnhancer(const FreqEnhanceConfig& cfg) : cfg_(cfg) {
  const int c = cfg.channels;
  const int cf = cfg.reduced();
  if (c % 4 != 0)
    throw std::invalid_argument("freq_enhance: channels must be divisible by 4");
  high_proj_ = Conv2dLayer("mfea.high_proj", 3 * c, cf, 1, 1, 0);
  low_proj_ = Conv2dLayer("mfea.low_proj", c, cf, 1, 1, 0);
  coarse_proj_ = Conv2dLayer("mfea.coarse_proj", 3 * c, cf, 1, 1, 0);
  battn_.conv1 = Conv2dLayer("mfea.battn.conv1", cf, cf / 2, 3, 1, 1);
  battn_.conv2 = Conv2dLayer("mfea.battn.conv2", cf / 2, 1, 1, 1, 0);
  sattn_.conv1 = Conv2dLayer("mfea.sattn.conv1", cf, cf / 2, 3, 1, 1);
  sattn_.conv2 = Conv2dLayer("mfea.sattn.conv2", cf / 2, 1, 1, 1, 0);
}

void FrequencyEnhancer::init(ParamStore& ps, Rng& rng) {
  high_proj_.init(ps, rng);
  low_proj_.init(ps, rng);
  coarse_proj_.init(ps, rng);
  battn_.conv1.init(ps, rng);
  battn_.conv2.init(ps, rng);
  sattn_.conv1.init(ps, rng);
  sattn_.conv2.init(ps, rng);
  ps.add("mfea.alpha", scalar_tensor(cfg_.alpha0), true);
  ps.add("mfea.beta", scalar_tensor(cfg_.beta0), true);
}

FreqEnhanceOut FrequencyEnhancer::forward(const Tensor& x, ParamStore& ps) {
  if (x.c != cfg_.channels)
    throw std::invalid_argument("freq_enhance: expected " + std::to_string(cfg_.channels) +
                                " channels, got " + x.shape_str());
  if (x.h < 4 || x.w < 4 || x.h % 4 != 0 || x.w % 4 != 0)
    throw std::invalid_argument(
        "freq_enhance: feature H and W must be >= 4 and divisible by 4 (two halvings), got " +
        x.shape_str());
  x_ = x;
  const auto& K = kern::active();

  // fine scale
  WaveletBands bands = haar_decompose(x);
  bands_h_ = bands.ll.h;
  bands_w_ = bands.ll.w;
  Tensor hcat = concat_channels({&bands.lh, &bands.hl, &bands.hh});
  Tensor high_fine = upsample_bilinear(high_proj_.forward(hcat, ps), x.h, x.w);
  Tensor low = upsample_bilinear(low_proj_.forward(bands.ll, ps), x.h, x.w);

  // coarse scale: pool once, split again
  Tensor xc = avg_pool2(x);
  WaveletBands cbands = haar_decompose(xc);
  coarse_h_ = cbands.ll.h;
  coarse_w_ = cbands.ll.w;
  Tensor ccat = concat_channels({&cbands.lh, &cbands.hl, &cbands.hh});
  Tensor high_coarse = upsample_bilinear(coarse_proj_.forward(ccat, ps), x.h, x.w);

  Tensor attn_b = battn_.forward(high_fine, ps);
  Tensor attn_s = sattn_.forward(low, ps);

  const double alpha = ps.value("mfea.alpha").data[0];
  const double beta = ps.value("mfea.beta").data[0];
  mix_ = Tensor(x.b, 1, x.h, x.w);
  K.scale(attn_b.data.data(), alpha, mix_.data.data(), mix_.size());
  K.axpy(beta, attn_s.data.data(), mix_.data.data(), mix_.size());

  // enhanced = x + fusion * (x (.) mix), attention broadcast over channels
  Tensor enhanced(x.b, x.c, x.h, x.w);
  for (int ib = 0; ib < x.b; ++ib) {
    const double* mp = mix_.plane(ib, 0);
    for (int ic = 0; ic < x.c; ++ic) {
      const double* xp = x.plane(ib, ic);
      double* ep = enhanced.plane(ib, ic);
      for (std::size_t i = 0; i < x.plane_size(); ++i)
        ep[i] = xp[i] + cfg_.fusion * (xp[i] * mp[i]);
    }
  }

  saved_.enhanced = enhanced;
  saved_.high_fine = high_fine;
  saved_.high_coarse = high_coarse;
  saved_.low = low;
  saved_.attn_boundary = attn_b;
  saved_.attn_structure = attn_s;
  return saved_;
}

Tensor FrequencyEnhancer::backward(const Tensor& g_enhanced, const Tensor& g_high_fine,
                                   const Tensor& g_high_coarse, ParamStore& ps,
                                   const Tensor& g_attn_b_ext, const Tensor& g_attn_s_ext) {
  const auto& K = kern::active();
  const Tensor& x = x_;
  const double alpha = ps.value("mfea.alpha").data[0];
  const double beta = ps.value("mfea.beta").data[0];

  // modulation: enhanced = x + fusion * x (.) mix
  Tensor gx(x.b, x.c, x.h, x.w);
  Tensor g_mix(x.b, 1, x.h, x.w);
  for (int ib = 0; ib < x.b; ++ib) {
    const double* mp = mix_.plane(ib, 0);
    double* gm = g_mix.plane(ib, 0);
    for (int ic = 0; ic < x.c; ++ic) {
      const double* xp = x.plane(ib, ic);
      const double* ge = g_enhanced.plane(ib, ic);
      double* gxp = gx.plane(ib, ic);
      for (std::size_t i = 0; i < x.plane_size(); ++i) {
        gxp[i] = ge[i] * (1.0 + cfg_.fusion * mp[i]);
        gm[i] += cfg_.fusion * ge[i] * xp[i];
      }
    }
  }

  Tensor g_alpha = scalar_tensor(K.dot(g_mix.data.data(), saved_.attn_boundary.data.data(),
                                       g_mix.size()));
  Tensor g_beta = scalar_tensor(K.dot(g_mix.data.data(), saved_.attn_structure.data.data(),
                                      g_mix.size()));
  ps.accumulate_grad("mfea.alpha", g_alpha);
  ps.accumulate_grad("mfea.beta", g_beta);

  Tensor g_attn_b = scale(g_mix, alpha);
  Tensor g_attn_s = scale(g_mix, beta);
  if (!g_attn_b_ext.data.empty())
    K.add(g_attn_b.data.data(), g_attn_b_ext.data.data(), g_attn_b.data.data(), g_attn_b.size());
  if (!g_attn_s_ext.data.empty())
    K.add(g_attn_s.data.data(), g_attn_s_ext.data.data(), g_attn_s.data.data(), g_attn_s.size());

  // attention heads feed back into the frequency features
  Tensor g_hf = battn_.backward(g_attn_b, ps);
  K.add(g_hf.data.data(), g_high_fine.data.data(), g_hf.data.data(), g_hf.size());
  Tensor g_low = sattn_.backward(g_attn_s, ps);

  // fine scale
  Tensor g_hcat = high_proj_.backward(upsample_bilinear_backward(g_hf, bands_h_, bands_w_), ps);
  std::vector<Tensor> g_details = split_channels(g_hcat, {x.c, x.c, x.c});
  Tensor g_ll = low_proj_.backward(upsample_bilinear_backward(g_low, bands_h_, bands_w_), ps);
  Tensor g_fine =
      haar_decompose_backward({g_ll, g_details[0], g_details[1], g_details[2]});
  K.add(gx.data.data(), g_fine.data.data(), gx.data.data(), gx.size());

  // coarse scale: the pooled approximation band is not consumed, its grad is zero
  Tensor g_ccat = coarse_proj_.backward(
      upsample_bilinear_backward(g_high_coarse, coarse_h_, coarse_w_), ps);
  std::vector<Tensor> g_cdetails = split_channels(g_ccat, {x.c, x.c, x.c});
  Tensor g_cll(x.b, x.c, coarse_h_, coarse_w_);
  Tensor g_xc = haar_decompose_backward({g_cll, g_cdetails[0], g_cdetails[1], g_cdetails[2]});
  Tensor g_coarse = avg_pool2_backward(g_xc);
  K.add(gx.data.data(), g_coarse.data.data(), gx.data.data(), gx.size());

  return gx;
}

} // namespace freqseg
