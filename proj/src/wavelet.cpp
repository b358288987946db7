#include "freqseg/wavelet.hpp"

#include <stdexcept>

namespace freqseg {

WaveletBands haar_decompose(const Tensor& x) {
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw std::invalid_argument("haar_decompose: H and W must be even, got " + x.shape_str());
  const int hh2 = x.h / 2, wh2 = x.w / 2;
  WaveletBands out{Tensor(x.b, x.c, hh2, wh2), Tensor(x.b, x.c, hh2, wh2),
                   Tensor(x.b, x.c, hh2, wh2), Tensor(x.b, x.c, hh2, wh2)};
  for (int ib = 0; ib < x.b; ++ib)
    for (int ic = 0; ic < x.c; ++ic)
      for (int oy = 0; oy < hh2; ++oy) {
        const double* r0 = x.row(ib, ic, 2 * oy);
        const double* r1 = x.row(ib, ic, 2 * oy + 1);
        double* llr = out.ll.row(ib, ic, oy);
        double* lhr = out.lh.row(ib, ic, oy);
        double* hlr = out.hl.row(ib, ic, oy);
        double* hhr = out.hh.row(ib, ic, oy);
        for (int ox = 0; ox < wh2; ++ox) {
          const double a = r0[2 * ox], b = r0[2 * ox + 1];
          const double c = r1[2 * ox], d = r1[2 * ox + 1];
          llr[ox] = (a + b + c + d) * 0.5;
          lhr[ox] = (a + b - c - d) * 0.5; // horizontal detail (top-bottom difference)
          hlr[ox] = (a - b + c - d) * 0.5; // vertical detail (left-right difference)
          hhr[ox] = (a - b - c + d) * 0.5; // diagonal
        }
      }
  return out;
}

Tensor haar_reconstruct(const WaveletBands& bands) {
  const Tensor& ll = bands.ll;
  if (!ll.same_shape(bands.lh) || !ll.same_shape(bands.hl) || !ll.same_shape(bands.hh))
    throw std::invalid_argument("haar_reconstruct: band shapes differ");
  Tensor x(ll.b, ll.c, ll.h * 2, ll.w * 2);
  for (int ib = 0; ib < ll.b; ++ib)
    for (int ic = 0; ic < ll.c; ++ic)
      for (int oy = 0; oy < ll.h; ++oy) {
        const double* llr = ll.row(ib, ic, oy);
        const double* lhr = bands.lh.row(ib, ic, oy);
        const double* hlr = bands.hl.row(ib, ic, oy);
        const double* hhr = bands.hh.row(ib, ic, oy);
        double* r0 = x.row(ib, ic, 2 * oy);
        double* r1 = x.row(ib, ic, 2 * oy + 1);
        for (int ox = 0; ox < ll.w; ++ox) {
          const double s = llr[ox], h = lhr[ox], v = hlr[ox], d = hhr[ox];
          r0[2 * ox] = (s + h + v + d) * 0.5;
          r0[2 * ox + 1] = (s + h - v - d) * 0.5;
          r1[2 * ox] = (s - h + v - d) * 0.5;
          r1[2 * ox + 1] = (s - h - v + d) * 0.5;
        }
      }
  return x;
}

Tensor haar_decompose_backward(const WaveletBands& gbands) {
  return haar_reconstruct(gbands);
}

} // namespace freqseg
