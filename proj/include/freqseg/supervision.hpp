#pragma once

#include "freqseg/decoder.hpp"
#include "freqseg/tensor.hpp"

namespace freqseg {

// Binary masks travel as (B,1,H,W) tensors whose entries are exactly 0 or 1.
void check_binary(const Tensor& m, const char* who);

// Morphological gradient band: dilate(m) AND NOT erode(m) with a square
// structuring element of side 2r+1. Dilation pads with 0, erosion with 1, so
// the image frame is never spuriously labeled boundary (a full-frame mask
// yields an empty band).
Tensor boundary_from_mask(const Tensor& mask, int radius = 1);

// mean BCE over all elements, computed in the stable logit form
// max(z,0) - z*t + log(1 + exp(-|z|))
double bce_with_logits(const Tensor& logits, const Tensor& target);
// gradient of the above: (sigmoid(z) - t) / N, accumulated into g
void bce_with_logits_backward(const Tensor& logits, const Tensor& target, Tensor& g,
                              double weight = 1.0);

struct LossBreakdown {
  double total = 0.0;
  double mask = 0.0;
  double boundary = 0.0;
  Tensor boundary_gt; // derived from the mask, kept for inspection
};

// total = mask_bce + lambda_b * boundary_bce; boundary term present only for
// dual-head predictions
LossBreakdown total_loss(const DualPrediction& pred, const Tensor& mask_gt, double lambda_b,
                         int boundary_radius = 1);
// fills the logit gradients for both heads (boundary grad empty when unused)
void total_loss_backward(const DualPrediction& pred, const Tensor& mask_gt,
                         const Tensor& boundary_gt, double lambda_b, Tensor& g_mask,
                         Tensor& g_boundary);

} // namespace freqseg
