#include "freqseg/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freqseg {

void check_binary(const Tensor& m, const char* who) {
  for (double v : m.data)
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument(std::string(who) + ": mask entries must be exactly 0 or 1");
}

namespace {
// window extremum with an explicit out-of-frame value
Tensor morph(const Tensor& m, int radius, bool dilate) {
  const double outside = dilate ? 0.0 : 1.0;
  Tensor out(m.b, m.c, m.h, m.w);
  for (int ib = 0; ib < m.b; ++ib)
    for (int ic = 0; ic < m.c; ++ic) {
      const double* mp = m.plane(ib, ic);
      double* op = out.plane(ib, ic);
      for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x) {
          double best = outside;
          for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
              const int yy = y + dy, xx = x + dx;
              const double v = (yy < 0 || yy >= m.h || xx < 0 || xx >= m.w)
                                   ? outside
                                   : mp[static_cast<std::size_t>(yy) * m.w + xx];
              best = dilate ? std::max(best, v) : std::min(best, v);
            }
          op[static_cast<std::size_t>(y) * m.w + x] = best;
        }
    }
  return out;
}
} // namespace

Tensor boundary_from_mask(const Tensor& mask, int radius) {
  check_binary(mask, "boundary_from_mask");
  if (radius < 1) throw std::invalid_argument("boundary_from_mask: radius must be >= 1");
  Tensor dil = morph(mask, radius, true);
  Tensor ero = morph(mask, radius, false);
  Tensor out(mask.b, mask.c, mask.h, mask.w);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data[i] = (dil.data[i] == 1.0 && ero.data[i] == 0.0) ? 1.0 : 0.0;
  return out;
}

double bce_with_logits(const Tensor& logits, const Tensor& target) {
  if (!logits.same_shape(target))
    throw std::invalid_argument("bce_with_logits: shape mismatch " + logits.shape_str() + " vs " +
                                target.shape_str());
  double acc = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.data[i], t = target.data[i];
    acc += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  return acc / static_cast<double>(logits.size());
}

void bce_with_logits_backward(const Tensor& logits, const Tensor& target, Tensor& g,
                              double weight) {
  if (g.data.empty()) g = Tensor(logits.b, logits.c, logits.h, logits.w);
  const double scale = weight / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.data[i];
    const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    g.data[i] += scale * (s - target.data[i]);
  }
}

LossBreakdown total_loss(const DualPrediction& pred, const Tensor& mask_gt, double lambda_b,
                         int boundary_radius) {
  if (lambda_b < 0.0) throw std::invalid_argument("total_loss: lambda_b must be >= 0");
  LossBreakdown out;
  out.mask = bce_with_logits(pred.mask_logits, mask_gt);
  if (pred.has_boundary) {
    out.boundary_gt = boundary_from_mask(mask_gt, boundary_radius);
    out.boundary = bce_with_logits(pred.boundary_logits, out.boundary_gt);
  }
  out.total = out.mask + lambda_b * out.boundary;
  return out;
}

void total_loss_backward(const DualPrediction& pred, const Tensor& mask_gt,
                         const Tensor& boundary_gt, double lambda_b, Tensor& g_mask,
                         Tensor& g_boundary) {
  bce_with_logits_backward(pred.mask_logits, mask_gt, g_mask, 1.0);
  if (pred.has_boundary)
    bce_with_logits_backward(pred.boundary_logits, boundary_gt, g_boundary, lambda_b);
}

} // namespace freqseg
