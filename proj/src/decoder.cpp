#include "freqseg/decoder.hpp"

#include <algorithm>

#include "freqseg/kernels.hpp"

namespace freqseg {

BoundaryGuidedDecoder::BoundaryGuidedDecoder(const DecoderConfig& cfg) : cfg_(cfg) {
  int c = cfg.in_channels;
  for (int i = 0; i < DecoderConfig::up_blocks; ++i) {
    const int cout = std::max(c / 2, DecoderConfig::channel_floor);
    ups_[i] = TConv2dLayer("mbgd.up" + std::to_string(i), c, cout);
    c = cout;
  }
  boundary_head_ = Conv2dLayer("mbgd.boundary_head", c, 1, 1, 1, 0);
  boundary_feat_ = Conv2dLayer("mbgd.boundary_feat", 1, cfg.boundary_feat_channels, 3, 1, 1);
  mask_head_ = Conv2dLayer("mbgd.mask_head",
                           cfg.dual_head ? c + cfg.boundary_feat_channels : c, 1, 1, 1, 0);
}

void BoundaryGuidedDecoder::init(ParamStore& ps, Rng& rng) {
  for (auto& up : ups_) up.init(ps, rng);
  if (cfg_.dual_head) {
    boundary_head_.init(ps, rng);
    boundary_feat_.init(ps, rng);
  }
  mask_head_.init(ps, rng);
}

DualPrediction BoundaryGuidedDecoder::forward(const Tensor& features, ParamStore& ps) {
  Tensor x = features;
  for (int i = 0; i < DecoderConfig::up_blocks; ++i) {
    pre_[i] = ups_[i].forward(x, ps);
    x = relu(pre_[i]);
  }
  DualPrediction out;
  if (!cfg_.dual_head) {
    out.mask_logits = mask_head_.forward(x, ps);
    return out;
  }
  out.boundary_logits = boundary_head_.forward(x, ps); // boundary-first
  out.has_boundary = true;
  sigma_b_ = sigmoid(out.boundary_logits);
  Tensor bfeat = boundary_feat_.forward(sigma_b_, ps);
  out.mask_logits = mask_head_.forward(concat_channels({&x, &bfeat}), ps);
  return out;
}

Tensor BoundaryGuidedDecoder::backward(const Tensor& g_mask, const Tensor& g_boundary,
                                       ParamStore& ps) {
  const auto& K = kern::active();
  Tensor g_shared;
  if (!cfg_.dual_head) {
    g_shared = mask_head_.backward(g_mask, ps);
  } else {
    Tensor g_concat = mask_head_.backward(g_mask, ps);
    const int c_shared = g_concat.c - cfg_.boundary_feat_channels;
    std::vector<Tensor> parts = split_channels(g_concat, {c_shared, cfg_.boundary_feat_channels});
    g_shared = std::move(parts[0]);

    // mask gradient reaches the boundary head through sigmoid -> conv3x3 -> concat
    Tensor g_sigma = boundary_feat_.backward(parts[1], ps);
    Tensor g_blogits;
    sigmoid_backward(sigma_b_, g_sigma, g_blogits);
    if (!g_boundary.data.empty())
      K.add(g_blogits.data.data(), g_boundary.data.data(), g_blogits.data.data(),
            g_blogits.size());
    Tensor g_from_bhead = boundary_head_.backward(g_blogits, ps);
    K.add(g_shared.data.data(), g_from_bhead.data.data(), g_shared.data.data(), g_shared.size());
  }

  Tensor g = std::move(g_shared);
  for (int i = DecoderConfig::up_blocks - 1; i >= 0; --i) {
    Tensor g_pre;
    relu_backward(pre_[i], g, g_pre);
    g = ups_[i].backward(g_pre, ps);
  }
  return g;
}

} // namespace freqseg
