#include "freqseg/boundary_refine.hpp"

#include <cmath>
#include <stdexcept>

#include "freqseg/kernels.hpp"

namespace freqseg {

namespace {
// fc2 emits (B, T*P, 1, 1); the prototype is laid out (B, P, T, 1)
Tensor proto_from_flat(const Tensor& flat, int tokens, int pdim) {
  Tensor proto(flat.b, pdim, tokens, 1);
  for (int ib = 0; ib < flat.b; ++ib)
    for (int t = 0; t < tokens; ++t)
      for (int j = 0; j < pdim; ++j)
        proto.at(ib, j, t, 0) = flat.at(ib, t * pdim + j, 0, 0);
  return proto;
}

Tensor flat_from_proto_grad(const Tensor& gproto, int tokens, int pdim) {
  Tensor flat(gproto.b, tokens * pdim, 1, 1);
  for (int ib = 0; ib < gproto.b; ++ib)
    for (int t = 0; t < tokens; ++t)
      for (int j = 0; j < pdim; ++j)
        flat.at(ib, t * pdim + j, 0, 0) = gproto.at(ib, j, t, 0);
  return flat;
}
} // namespace

BoundaryRefiner::BoundaryRefiner(const BoundaryRefineConfig& cfg) : cfg_(cfg) {
  if (cfg.head_dim == 0 && cfg.channels % cfg.heads != 0)
    throw std::invalid_argument("boundary_refine: channels must divide by heads for auto head_dim");
  const int d_total = cfg.attn_dim();
  fc1_ = Conv2dLayer("fgbr.distill.fc1", 2 * cfg.reduced, cfg.distill_hidden, 1, 1, 0);
  fc2_ = Conv2dLayer("fgbr.distill.fc2", cfg.distill_hidden, cfg.proto_tokens * cfg.proto_dim, 1,
                     1, 0);
  q_proj_ = Conv2dLayer("fgbr.q_proj", cfg.channels, d_total, 1, 1, 0);
  k_proj_ = Conv2dLayer("fgbr.k_proj", cfg.proto_dim, d_total, 1, 1, 0);
  v_proj_ = Conv2dLayer("fgbr.v_proj", cfg.proto_dim, d_total, 1, 1, 0);
  out_proj_ = Conv2dLayer("fgbr.out_proj", d_total, cfg.channels, 1, 1, 0);
}

void BoundaryRefiner::init(ParamStore& ps, Rng& rng) {
  fc1_.init(ps, rng);
  fc2_.init(ps, rng);
  q_proj_.init(ps, rng);
  k_proj_.init(ps, rng);
  v_proj_.init(ps, rng);
  out_proj_.init(ps, rng);
  ps.add("fgbr.omega", scalar_tensor(cfg_.omega0), true);
}

Tensor BoundaryRefiner::distill(const Tensor& high_fine, const Tensor& high_coarse,
                                ParamStore& ps) {
  if (!high_fine.same_shape(high_coarse))
    throw std::invalid_argument("distill: high-frequency inputs differ in shape: " +
                                high_fine.shape_str() + " vs " + high_coarse.shape_str());
  distill_h_ = high_fine.h;
  distill_w_ = high_fine.w;
  Tensor pooled = global_avg_pool(concat_channels({&high_fine, &high_coarse}));
  distill_pre_ = fc1_.forward(pooled, ps);
  Tensor flat = fc2_.forward(relu(distill_pre_), ps);
  return proto_from_flat(flat, cfg_.proto_tokens, cfg_.proto_dim);
}

Tensor BoundaryRefiner::refine(const Tensor& features, const Tensor& proto, ParamStore& ps) {
  const int heads = cfg_.heads, d = cfg_.per_head();
  const int tokens = proto.h;
  const int n = features.h * features.w;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  q_ = q_proj_.forward(features, ps); // (B, D, H, W)
  k_ = k_proj_.forward(proto, ps);    // (B, D, T, 1)
  v_ = v_proj_.forward(proto, ps);

  attn_w_ = Tensor(features.b, heads, n, tokens);
  ctx_ = Tensor(features.b, q_.c, features.h, features.w);
  std::vector<double> logits(tokens);

  for (int ib = 0; ib < features.b; ++ib) {
    for (int hd = 0; hd < heads; ++hd) {
      for (int p = 0; p < n; ++p) {
        for (int t = 0; t < tokens; ++t) {
          double acc = 0.0;
          for (int j = 0; j < d; ++j)
            acc += q_.plane(ib, hd * d + j)[p] * k_.at(ib, hd * d + j, t, 0);
          logits[t] = acc * inv_sqrt_d;
        }
        softmax_vec(logits.data(), tokens);
        double* wrow = attn_w_.row(ib, hd, p);
        for (int t = 0; t < tokens; ++t) wrow[t] = logits[t];
        for (int j = 0; j < d; ++j) {
          double acc = 0.0;
          for (int t = 0; t < tokens; ++t) acc += logits[t] * v_.at(ib, hd * d + j, t, 0);
          ctx_.plane(ib, hd * d + j)[p] = acc;
        }
      }
    }
  }

  attended_ = out_proj_.forward(ctx_, ps); // (B, C, H, W)
  const double omega = ps.value("fgbr.omega").data[0];
  Tensor refined(features.b, features.c, features.h, features.w);
  const auto& K = kern::active();
  K.scale(attended_.data.data(), omega, refined.data.data(), refined.size());
  K.add(refined.data.data(), features.data.data(), refined.data.data(), refined.size());
  return refined;
}

BoundaryRefineOut BoundaryRefiner::forward(const Tensor& features, const Tensor& high_fine,
                                           const Tensor& high_coarse, ParamStore& ps) {
  BoundaryRefineOut out;
  out.proto = distill(high_fine, high_coarse, ps);
  out.refined = refine(features, out.proto, ps);
  return out;
}

BoundaryRefiner::Grads BoundaryRefiner::backward(const Tensor& g_refined, ParamStore& ps) {
  const auto& K = kern::active();
  const int heads = cfg_.heads, d = cfg_.per_head();
  const int tokens = k_.h;
  const int n = ctx_.h * ctx_.w;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double omega = ps.value("fgbr.omega").data[0];

  ps.accumulate_grad("fgbr.omega", scalar_tensor(K.dot(g_refined.data.data(),
                                                       attended_.data.data(), g_refined.size())));
  Tensor g_attended = scale(g_refined, omega);
  Tensor g_ctx = out_proj_.backward(g_attended, ps);

  Tensor g_q(q_.b, q_.c, q_.h, q_.w);
  Tensor g_k(k_.b, k_.c, k_.h, k_.w);
  Tensor g_v(v_.b, v_.c, v_.h, v_.w);
  std::vector<double> g_w(tokens), g_logit(tokens);

  for (int ib = 0; ib < q_.b; ++ib) {
    for (int hd = 0; hd < heads; ++hd) {
      for (int p = 0; p < n; ++p) {
        const double* wrow = attn_w_.row(ib, hd, p);
        for (int t = 0; t < tokens; ++t) {
          double acc = 0.0;
          for (int j = 0; j < d; ++j)
            acc += g_ctx.plane(ib, hd * d + j)[p] * v_.at(ib, hd * d + j, t, 0);
          g_w[t] = acc;
          for (int j = 0; j < d; ++j)
            g_v.at(ib, hd * d + j, t, 0) += wrow[t] * g_ctx.plane(ib, hd * d + j)[p];
        }
        double dotv = 0.0;
        for (int t = 0; t < tokens; ++t) dotv += wrow[t] * g_w[t];
        for (int t = 0; t < tokens; ++t) g_logit[t] = wrow[t] * (g_w[t] - dotv);
        for (int j = 0; j < d; ++j) {
          const double qv = q_.plane(ib, hd * d + j)[p];
          double acc = 0.0;
          for (int t = 0; t < tokens; ++t) {
            acc += g_logit[t] * k_.at(ib, hd * d + j, t, 0);
            g_k.at(ib, hd * d + j, t, 0) += inv_sqrt_d * g_logit[t] * qv;
          }
          g_q.plane(ib, hd * d + j)[p] += inv_sqrt_d * acc;
        }
      }
    }
  }

  Grads out;
  out.features = q_proj_.backward(g_q, ps);
  K.add(out.features.data.data(), g_refined.data.data(), out.features.data.data(),
        out.features.size());

  Tensor g_proto = add(k_proj_.backward(g_k, ps), v_proj_.backward(g_v, ps));
  Tensor g_flat = flat_from_proto_grad(g_proto, cfg_.proto_tokens, cfg_.proto_dim);
  Tensor g_hidden = fc2_.backward(g_flat, ps);
  Tensor g_pre;
  relu_backward(distill_pre_, g_hidden, g_pre);
  Tensor g_pooled = fc1_.backward(g_pre, ps);
  Tensor g_cat = global_avg_pool_backward(g_pooled, distill_h_, distill_w_);
  std::vector<Tensor> parts = split_channels(g_cat, {cfg_.reduced, cfg_.reduced});
  out.high_fine = std::move(parts[0]);
  out.high_coarse = std::move(parts[1]);
  return out;
}

} // namespace freqseg
