#pragma once

#include "freqseg/tensor.hpp"

namespace freqseg {

struct EvalRecord {
  double dice = 0.0;
  double miou = 0.0;
  double hd = 0.0;       // pixels unless a spacing multiplier is applied
  bool hd_sentinel = false; // an empty mask forced the image-diagonal sentinel
};

// 2|P^G| / (|P|+|G|); both empty -> 1
double dice(const Tensor& pred, const Tensor& gt);

// mean IoU over {foreground, background}; an empty class on both sides counts 1
double miou(const Tensor& pred, const Tensor& gt);

// exact symmetric Hausdorff distance in pixels (Euclidean, full percentile);
// either side empty -> image diagonal, flagged via *sentinel
double hausdorff(const Tensor& pred, const Tensor& gt, bool* sentinel = nullptr);

// percentile variant over the pooled directed nearest distances; pct=100
// reproduces full hausdorff exactly (HD95 is pct=95)
double hausdorff_percentile(const Tensor& pred, const Tensor& gt, int pct,
                            bool* sentinel = nullptr);

EvalRecord evaluate_masks(const Tensor& pred, const Tensor& gt, double spacing = 1.0,
                          int hd_pct = 100);

// probability/logit map -> {0,1} mask at threshold 0.5 on the probability
Tensor binarize_probs(const Tensor& probs, double threshold = 0.5);

} // namespace freqseg
