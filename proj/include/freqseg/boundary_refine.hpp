#pragma once

#include "freqseg/ops.hpp"

namespace freqseg {

struct BoundaryRefineConfig {
  int channels = 64;     // C of the enhanced features
  int reduced = 32;      // C_f of the high-frequency inputs
  int heads = 8;
  int head_dim = 0;      // 0 = channels/heads, so D == C
  int proto_dim = 64;
  int proto_tokens = 1;
  int distill_hidden = 256;
  double omega0 = 0.2;   // residual fusion weight, learnable
  int attn_dim() const { return heads * (head_dim > 0 ? head_dim : channels / heads); }
  int per_head() const { return head_dim > 0 ? head_dim : channels / heads; }
};

struct BoundaryRefineOut {
  Tensor refined;  // (B, C, H, W)
  Tensor proto;    // (B, proto_dim, T, 1) — compact boundary descriptor
};

// Distills a compact boundary prototype from the pooled high-frequency
// features and injects it back into the spatial features through multi-head
// cross-attention (queries from the features, keys/values from the
// prototype), fused residually:
//   refined = x + omega * W_o(Attn(Q, K, V))
class BoundaryRefiner {
 public:
  BoundaryRefiner() = default;
  explicit BoundaryRefiner(const BoundaryRefineConfig& cfg);
  void init(ParamStore& ps, Rng& rng);

  Tensor distill(const Tensor& high_fine, const Tensor& high_coarse, ParamStore& ps);
  Tensor refine(const Tensor& features, const Tensor& proto, ParamStore& ps);
  BoundaryRefineOut forward(const Tensor& features, const Tensor& high_fine,
                            const Tensor& high_coarse, ParamStore& ps);

  // returns gradients wrt (features, high_fine, high_coarse)
  struct Grads {
    Tensor features, high_fine, high_coarse;
  };
  Grads backward(const Tensor& g_refined, ParamStore& ps);

  // (B, heads, H*W, T) softmax weights from the last forward; with one
  // prototype token these are identically 1
  const Tensor& attention_weights() const { return attn_w_; }
  const BoundaryRefineConfig& config() const { return cfg_; }

 private:
  BoundaryRefineConfig cfg_;
  Conv2dLayer fc1_, fc2_;                    // distiller MLP over pooled features
  Conv2dLayer q_proj_, k_proj_, v_proj_, out_proj_;

  // caches
  Tensor distill_pre_;                       // fc1 pre-activation
  int distill_h_ = 0, distill_w_ = 0;
  Tensor q_, k_, v_, attn_w_, ctx_, attended_;
};

} // namespace freqseg
