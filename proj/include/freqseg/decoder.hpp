#pragma once

#include <array>

#include "freqseg/ops.hpp"

namespace freqseg {

struct DualPrediction {
  Tensor mask_logits;              // (B, 1, 16*H1, 16*W1)
  Tensor boundary_logits;          // same shape; empty when the decoder is single-head
  bool has_boundary = false;
};

struct DecoderConfig {
  int in_channels = 64;
  int boundary_feat_channels = 16; // width of the boundary->feature conv
  bool dual_head = true;           // false = plain decoder, mask head only
  static constexpr int up_blocks = 4;
  static constexpr int channel_floor = 8;
};

// Four 2x2 stride-2 transposed-conv blocks (channels halved per block, floor
// 8) bring the feature grid to input-image resolution (x16). The dual-head
// variant predicts the boundary first, converts it to features through
// sigmoid + 3x3 conv, and concatenates those onto the shared features before
// the mask head.
class BoundaryGuidedDecoder {
 public:
  BoundaryGuidedDecoder() = default;
  explicit BoundaryGuidedDecoder(const DecoderConfig& cfg);
  void init(ParamStore& ps, Rng& rng);

  DualPrediction forward(const Tensor& features, ParamStore& ps);
  // g_boundary may be empty when no boundary loss is attached
  Tensor backward(const Tensor& g_mask, const Tensor& g_boundary, ParamStore& ps);

  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  std::array<TConv2dLayer, DecoderConfig::up_blocks> ups_;
  std::array<Tensor, DecoderConfig::up_blocks> pre_; // tconv outputs, pre-relu
  Conv2dLayer boundary_head_, boundary_feat_, mask_head_;
  Tensor sigma_b_; // sigmoid(boundary logits)
};

} // namespace freqseg
