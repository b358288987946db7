#include "freqseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "freqseg/supervision.hpp"

namespace freqseg {

namespace {
void check_pair(const Tensor& pred, const Tensor& gt, const char* who) {
  if (!pred.same_shape(gt))
    throw std::invalid_argument(std::string(who) + ": shape mismatch " + pred.shape_str() +
                                " vs " + gt.shape_str());
  check_binary(pred, who);
  check_binary(gt, who);
}
} // namespace

double dice(const Tensor& pred, const Tensor& gt) {
  check_pair(pred, gt, "dice");
  std::size_t inter = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.data[i] == 1.0, g = gt.data[i] == 1.0;
    inter += (p && g);
    np += p;
    ng += g;
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double miou(const Tensor& pred, const Tensor& gt) {
  check_pair(pred, gt, "miou");
  double acc = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const double want = cls == 0 ? 1.0 : 0.0;
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred.data[i] == want, g = gt.data[i] == want;
      inter += (p && g);
      uni += (p || g);
    }
    acc += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return acc / 2.0;
}

namespace {

using Points = std::vector<std::pair<int, int>>;

Points collect(const Tensor& m) {
  Points out;
  for (int ib = 0; ib < m.b; ++ib)
    for (int ic = 0; ic < m.c; ++ic)
      for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x)
          if (m.at(ib, ic, y, x) == 1.0) out.emplace_back(y, x);
  return out;
}

// exact nearest squared distance from each point of A to the set B
void directed_d2(const Points& A, const Points& B, std::vector<long long>& out) {
  for (const auto& [ay, ax] : A) {
    long long best = -1;
    for (const auto& [by, bx] : B) {
      const long long dy = ay - by, dx = ax - bx;
      const long long d2 = dy * dy + dx * dx;
      if (best < 0 || d2 < best) best = d2;
      if (best == 0) break;
    }
    out.push_back(best);
  }
}

} // namespace

double hausdorff_percentile(const Tensor& pred, const Tensor& gt, int pct, bool* sentinel) {
  check_pair(pred, gt, "hausdorff");
  if (pct < 1 || pct > 100) throw std::invalid_argument("hausdorff: percentile must be in [1,100]");
  if (sentinel) *sentinel = false;

  Points P = collect(pred), G = collect(gt);
  if (P.empty() || G.empty()) {
    if (sentinel) *sentinel = true;
    const double dh = pred.h - 1, dw = pred.w - 1;
    return std::sqrt(dh * dh + dw * dw);
  }

  std::vector<long long> d2;
  d2.reserve(P.size() + G.size());
  directed_d2(P, G, d2);
  directed_d2(G, P, d2);
  std::sort(d2.begin(), d2.end());
  const std::size_t idx =
      (static_cast<std::size_t>(pct) * d2.size() + 99) / 100; // ceil(pct/100 * n)
  return std::sqrt(static_cast<double>(d2[idx - 1]));
}

double hausdorff(const Tensor& pred, const Tensor& gt, bool* sentinel) {
  return hausdorff_percentile(pred, gt, 100, sentinel);
}

EvalRecord evaluate_masks(const Tensor& pred, const Tensor& gt, double spacing, int hd_pct) {
  EvalRecord r;
  r.dice = dice(pred, gt);
  r.miou = miou(pred, gt);
  r.hd = hausdorff_percentile(pred, gt, hd_pct, &r.hd_sentinel) * spacing;
  return r;
}

Tensor binarize_probs(const Tensor& probs, double threshold) {
  Tensor out(probs.b, probs.c, probs.h, probs.w);
  for (std::size_t i = 0; i < probs.size(); ++i)
    out.data[i] = probs.data[i] >= threshold ? 1.0 : 0.0;
  return out;
}

} // namespace freqseg
