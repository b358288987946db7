#pragma once

#include "freqseg/ops.hpp"
#include "freqseg/wavelet.hpp"

namespace freqseg {

struct FreqEnhanceConfig {
  int channels = 64;      // C of the incoming feature map
  double fusion = 0.3;    // residual fusion weight, fixed (not learned)
  double alpha0 = 0.5;    // boundary-attention mix, learnable
  double beta0 = 0.5;     // structure-attention mix, learnable
  int reduced() const { return channels / 2; } // C_f, channel reduction ratio 2
};

struct FreqEnhanceOut {
  Tensor enhanced;   // same shape as the input features
  Tensor high_fine;  // (B, C_f, H, W) fine-scale high-frequency features
  Tensor high_coarse;// (B, C_f, H, W) coarse-scale, upsampled back
  Tensor low;        // (B, C_f, H, W)
  Tensor attn_boundary, attn_structure; // (B, 1, H, W), in (0,1)
};

// Two-scale Haar split of the feature map; detail bands drive a boundary
// attention, the approximation band a structure attention, and the two
// residually modulate the features:
//   enhanced = x + fusion * (x (.) (alpha*A_b + beta*A_s))
class FrequencyEnhancer {
 public:
  FrequencyEnhancer() = default;
  explicit FrequencyEnhancer(const FreqEnhanceConfig& cfg);
  void init(ParamStore& ps, Rng& rng);

  FreqEnhanceOut forward(const Tensor& features, ParamStore& ps);
  // upstream gradients for all three consumed outputs; returns grad wrt input.
  // g_attn_b / g_attn_s allow direct supervision of the attention maps
  // (empty = unused).
  Tensor backward(const Tensor& g_enhanced, const Tensor& g_high_fine,
                  const Tensor& g_high_coarse, ParamStore& ps, const Tensor& g_attn_b = {},
                  const Tensor& g_attn_s = {});

 private:
  struct AttnHead { // conv3x3 -> relu -> conv1x1 -> sigmoid, single-channel out
    Conv2dLayer conv1, conv2;
    Tensor pre, out; // relu pre-activation, sigmoid output
    Tensor forward(const Tensor& x, ParamStore& ps);
    Tensor backward(const Tensor& g_attn, ParamStore& ps);
  };

  FreqEnhanceConfig cfg_;
  Conv2dLayer high_proj_;   // 1x1, 3C -> C_f on fine detail bands
  Conv2dLayer low_proj_;    // 1x1,  C -> C_f on the fine approximation band
  Conv2dLayer coarse_proj_; // 1x1, 3C -> C_f on pooled-scale detail bands
  AttnHead battn_, sattn_;

  // forward caches
  Tensor x_;
  Tensor mix_;               // alpha*A_b + beta*A_s (B,1,H,W)
  FreqEnhanceOut saved_;
  int bands_h_ = 0, bands_w_ = 0, coarse_h_ = 0, coarse_w_ = 0;
};

} // namespace freqseg
