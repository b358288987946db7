#include "freqseg/model.hpp"

namespace freqseg {

Model::Model(const RunConfig& cfg) : cfg_(cfg) {
  BackboneConfig bb;
  bb.patch = cfg.patch;
  bb.embed_dim = cfg.channels;
  bb.depth = cfg.depth;
  bb.adapter_dim = cfg.adapter_dim;
  bb.freeze_body = cfg.freeze_body != 0;
  backbone_ = PatchEncoder(bb);

  if (cfg.mfea) {
    FreqEnhanceConfig fe;
    fe.channels = cfg.channels;
    fe.fusion = cfg.lambda;
    fe.alpha0 = cfg.alpha0;
    fe.beta0 = cfg.beta0;
    enhancer_ = std::make_unique<FrequencyEnhancer>(fe);

    if (cfg.fgbr) {
      BoundaryRefineConfig br;
      br.channels = cfg.channels;
      br.reduced = fe.reduced();
      br.heads = cfg.heads;
      br.head_dim = cfg.head_dim;
      br.proto_dim = cfg.proto_dim;
      br.proto_tokens = cfg.proto_tokens;
      br.distill_hidden = cfg.distill_hidden;
      br.omega0 = cfg.omega0;
      refiner_ = std::make_unique<BoundaryRefiner>(br);
    }
  }

  DecoderConfig dec;
  dec.in_channels = cfg.channels;
  dec.boundary_feat_channels = cfg.boundary_feat;
  dec.dual_head = cfg.mbgd != 0;
  decoder_ = BoundaryGuidedDecoder(dec);
}

void Model::init(ParamStore& ps, Rng& rng) {
  backbone_.init(ps, rng);
  if (enhancer_) enhancer_->init(ps, rng);
  if (refiner_) refiner_->init(ps, rng);
  decoder_.init(ps, rng);
}

DualPrediction Model::forward(const Tensor& image, ParamStore& ps) {
  f_spatial_ = backbone_.forward(image, ps);
  Tensor features = f_spatial_;
  if (enhancer_) {
    enh_out_ = enhancer_->forward(f_spatial_, ps);
    features = enh_out_.enhanced;
    if (refiner_) {
      BoundaryRefineOut r =
          refiner_->forward(features, enh_out_.high_fine, enh_out_.high_coarse, ps);
      proto_ = r.proto;
      features = r.refined;
    }
  }
  return decoder_.forward(features, ps);
}

void Model::backward(const Tensor& g_mask, const Tensor& g_boundary, ParamStore& ps) {
  Tensor g = decoder_.backward(g_mask, g_boundary, ps);
  if (enhancer_) {
    Tensor g_hf, g_hc;
    if (refiner_) {
      BoundaryRefiner::Grads rg = refiner_->backward(g, ps);
      g = std::move(rg.features);
      g_hf = std::move(rg.high_fine);
      g_hc = std::move(rg.high_coarse);
    } else {
      g_hf = Tensor(g.b, cfg_.channels / 2, g.h, g.w);
      g_hc = Tensor(g.b, cfg_.channels / 2, g.h, g.w);
    }
    g = enhancer_->backward(g, g_hf, g_hc, ps);
  }
  backbone_.backward(g, ps);
}

LossBreakdown Model::loss_and_backward(const DualPrediction& pred, const Tensor& mask_gt,
                                       ParamStore& ps) {
  LossBreakdown lb = total_loss(pred, mask_gt, cfg_.lambda_b, cfg_.boundary_radius);
  Tensor g_mask, g_boundary;
  total_loss_backward(pred, mask_gt, lb.boundary_gt, cfg_.lambda_b, g_mask, g_boundary);
  backward(g_mask, g_boundary, ps);
  return lb;
}

void perturb_trainable(ParamStore& ps, Rng& rng, double scale) {
  for (auto& [name, p] : ps) {
    if (!p.trainable) continue;
    for (double& v : p.value.data) v += rng.normal(0.0, scale);
  }
}

} // namespace freqseg
