#include "freqseg/backbone.hpp"

#include <stdexcept>
#include <string>

#include "freqseg/kernels.hpp"

namespace freqseg {

PatchEncoder::PatchEncoder(const BackboneConfig& cfg) : cfg_(cfg) {
  if (cfg.adapter_dim >= cfg.embed_dim)
    throw std::invalid_argument("backbone: adapter_dim must be < embed_dim");
  const int c = cfg.embed_dim;
  patch_embed_ = Conv2dLayer("backbone.patch_embed", 1, c, cfg.patch, cfg.patch, 0);
  blocks_.resize(cfg.depth);
  for (int i = 0; i < cfg.depth; ++i) {
    const std::string p = "backbone.block" + std::to_string(i);
    blocks_[i].mix3 = Conv2dLayer(p + ".mix3", c, c, 3, 1, 1);
    blocks_[i].mix1 = Conv2dLayer(p + ".mix1", c, c, 1, 1, 0);
    blocks_[i].adapter_down = Conv2dLayer(p + ".adapter_down", c, cfg.adapter_dim, 1, 1, 0);
    blocks_[i].adapter_up = Conv2dLayer(p + ".adapter_up", cfg.adapter_dim, c, 1, 1, 0);
  }
}

void PatchEncoder::init(ParamStore& ps, Rng& rng) {
  const bool body_trainable = !cfg_.freeze_body;
  patch_embed_.init(ps, rng, body_trainable);
  for (auto& blk : blocks_) {
    blk.mix3.init(ps, rng, body_trainable);
    blk.mix1.init(ps, rng, body_trainable);
    blk.adapter_down.init(ps, rng, true);
    blk.adapter_up.init(ps, rng, true, Init::Zero); // block output == body output at init
  }
}

Tensor PatchEncoder::forward(const Tensor& image, ParamStore& ps) {
  if (image.c != 1)
    throw std::invalid_argument("backbone: expected single-channel image, got " +
                                image.shape_str());
  if (image.h % cfg_.patch != 0 || image.w % cfg_.patch != 0)
    throw std::invalid_argument("backbone: image H and W must be divisible by patch=" +
                                std::to_string(cfg_.patch) + ", got " + image.shape_str());
  Tensor x = patch_embed_.forward(image, ps);
  for (auto& blk : blocks_) {
    blk.pre = blk.mix1.forward(blk.mix3.forward(x, ps), ps);
    Tensor h = relu(blk.pre);
    blk.a_pre = blk.adapter_down.forward(h, ps);
    Tensor a = blk.adapter_up.forward(relu(blk.a_pre), ps);
    x = add(h, a);
  }
  return x;
}

Tensor PatchEncoder::backward(const Tensor& gy, ParamStore& ps) {
  Tensor g = gy;
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    Block& blk = *it;
    Tensor g_a_relu = blk.adapter_up.backward(g, ps);
    Tensor g_a_pre;
    relu_backward(blk.a_pre, g_a_relu, g_a_pre);
    Tensor g_h = blk.adapter_down.backward(g_a_pre, ps);
    kern::active().add(g_h.data.data(), g.data.data(), g_h.data.data(), g_h.size());
    Tensor g_pre;
    relu_backward(blk.pre, g_h, g_pre);
    g = blk.mix3.backward(blk.mix1.backward(g_pre, ps), ps);
  }
  return patch_embed_.backward(g, ps, /*need_gx=*/false);
}

std::size_t PatchEncoder::body_param_count() const {
  std::size_t n = patch_embed_.param_count();
  for (const auto& blk : blocks_) n += blk.mix3.param_count() + blk.mix1.param_count();
  return n;
}

std::size_t PatchEncoder::adapter_param_count() const {
  std::size_t n = 0;
  for (const auto& blk : blocks_)
    n += blk.adapter_down.param_count() + blk.adapter_up.param_count();
  return n;
}

} // namespace freqseg
