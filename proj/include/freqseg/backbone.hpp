#pragma once

#include <vector>

#include "freqseg/ops.hpp"

namespace freqseg {

struct BackboneConfig {
  int patch = 16;
  int embed_dim = 64;
  int depth = 2;
  int adapter_dim = 16;
  bool freeze_body = true;
};

// Compact convolutional patch encoder standing in for a large pretrained
// backbone: the body (patch embedding + mixer blocks) is frozen by default
// and only the bottleneck adapters train. Emits (B, C, H/patch, W/patch).
class PatchEncoder {
 public:
  PatchEncoder() = default;
  explicit PatchEncoder(const BackboneConfig& cfg);
  void init(ParamStore& ps, Rng& rng);

  Tensor forward(const Tensor& image, ParamStore& ps); // image (B, 1, H, W)
  Tensor backward(const Tensor& gy, ParamStore& ps);

  std::size_t body_param_count() const;
  std::size_t adapter_param_count() const;
  const BackboneConfig& config() const { return cfg_; }

 private:
  struct Block {
    Conv2dLayer mix3, mix1;          // body: 3x3 conv then pointwise, relu after
    Conv2dLayer adapter_down, adapter_up; // trainable bottleneck, zero-init up
    Tensor pre, a_pre;               // pre-activation caches for the two relus
  };

  BackboneConfig cfg_;
  Conv2dLayer patch_embed_;
  std::vector<Block> blocks_;
};

} // namespace freqseg
