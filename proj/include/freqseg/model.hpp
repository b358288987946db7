#pragma once

#include <memory>

#include "freqseg/backbone.hpp"
#include "freqseg/boundary_refine.hpp"
#include "freqseg/config.hpp"
#include "freqseg/decoder.hpp"
#include "freqseg/freq_enhance.hpp"
#include "freqseg/supervision.hpp"

namespace freqseg {

// The full pipeline: patch encoder -> (frequency enhancement) -> (prototype
// refinement) -> decoder. Toggles mirror the ablation rows; disabling the
// dual-head decoder substitutes the plain single-head variant and drops the
// boundary loss.
class Model {
 public:
  explicit Model(const RunConfig& cfg);
  void init(ParamStore& ps, Rng& rng);

  DualPrediction forward(const Tensor& image, ParamStore& ps);
  void backward(const Tensor& g_mask, const Tensor& g_boundary, ParamStore& ps);

  // loss + gradient accumulation in one call; returns the breakdown
  LossBreakdown loss_and_backward(const DualPrediction& pred, const Tensor& mask_gt,
                                  ParamStore& ps);

  const RunConfig& config() const { return cfg_; }
  PatchEncoder& backbone() { return backbone_; }
  FrequencyEnhancer* enhancer() { return enhancer_.get(); }
  BoundaryRefiner* refiner() { return refiner_.get(); }
  BoundaryGuidedDecoder& decoder() { return decoder_; }

  // last-forward intermediates, for inspection dumps
  const Tensor& last_spatial() const { return f_spatial_; }
  const FreqEnhanceOut& last_enhance() const { return enh_out_; }
  const Tensor& last_proto() const { return proto_; }

 private:
  RunConfig cfg_;
  PatchEncoder backbone_;
  std::unique_ptr<FrequencyEnhancer> enhancer_;
  std::unique_ptr<BoundaryRefiner> refiner_;
  BoundaryGuidedDecoder decoder_;

  Tensor f_spatial_, proto_;
  FreqEnhanceOut enh_out_;
};

// add noise to every trainable entry; used by gradient-check harnesses so
// zero-initialized paths (adapter up-projections) carry signal too
void perturb_trainable(ParamStore& ps, Rng& rng, double scale);

} // namespace freqseg
