#include "freqseg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "freqseg/kernels.hpp"

namespace freqseg {

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (w.c != x.c)
    throw std::invalid_argument("conv2d: kernel expects " + std::to_string(w.c) +
                                " input channels, got " + std::to_string(x.c));
  if (bias.c != w.b || bias.b != 1 || bias.h != 1 || bias.w != 1)
    throw std::invalid_argument("conv2d: bias shape " + bias.shape_str() + " does not match Cout=" +
                                std::to_string(w.b));
  if (w.h != w.w) throw std::invalid_argument("conv2d: only square kernels supported");
}

int conv_out_dim(int in, int k, int stride, int pad) {
  const int num = in + 2 * pad - k;
  if (num < 0 || num % stride != 0)
    throw std::invalid_argument("conv2d: size " + std::to_string(in) + " incompatible with k=" +
                                std::to_string(k) + " stride=" + std::to_string(stride) +
                                " pad=" + std::to_string(pad));
  return num / stride + 1;
}

} // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad) {
  check_conv_shapes(x, w, bias);
  const auto& K = kern::active();
  const int k = w.h;
  const int oh = conv_out_dim(x.h, k, stride, pad);
  const int ow = conv_out_dim(x.w, k, stride, pad);
  Tensor y(x.b, w.b, oh, ow);

  for (int ib = 0; ib < x.b; ++ib) {
    for (int co = 0; co < w.b; ++co) {
      double* yp = y.plane(ib, co);
      const double bv = bias.data[co];
      for (std::size_t i = 0; i < y.plane_size(); ++i) yp[i] = bv;

      if (stride == 1) {
        // shifted-row accumulation; the whole row segment is one axpy
        for (int ci = 0; ci < x.c; ++ci) {
          const double* xp = x.plane(ib, ci);
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const double wv = w.at(co, ci, ky, kx);
              if (wv == 0.0) continue;
              const int ox0 = std::max(0, pad - kx);
              const int ox1 = std::min(ow - 1, x.w - 1 + pad - kx);
              if (ox1 < ox0) continue;
              const int len = ox1 - ox0 + 1;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy + ky - pad;
                if (iy < 0 || iy >= x.h) continue;
                K.axpy(wv, xp + static_cast<std::size_t>(iy) * x.w + (ox0 + kx - pad),
                       yp + static_cast<std::size_t>(oy) * ow + ox0, len);
              }
            }
          }
        }
      } else if (stride == k && pad == 0) {
        // non-overlapping patches: row-segment dot products
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            double acc = yp[static_cast<std::size_t>(oy) * ow + ox];
            for (int ci = 0; ci < x.c; ++ci) {
              const double* xp = x.plane(ib, ci);
              for (int ky = 0; ky < k; ++ky)
                acc += K.dot(&w.at(co, ci, ky, 0),
                             xp + static_cast<std::size_t>(oy * k + ky) * x.w + ox * k, k);
            }
            yp[static_cast<std::size_t>(oy) * ow + ox] = acc;
          }
        }
      } else {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            double acc = yp[static_cast<std::size_t>(oy) * ow + ox];
            for (int ci = 0; ci < x.c; ++ci)
              for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                  const int iy = oy * stride + ky - pad;
                  const int ix = ox * stride + kx - pad;
                  if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                  acc += w.at(co, ci, ky, kx) * x.at(ib, ci, iy, ix);
                }
            yp[static_cast<std::size_t>(oy) * ow + ox] = acc;
          }
        }
      }
    }
  }
  return y;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, int stride, int pad,
                     Tensor* gx, Tensor& gw, Tensor& gb) {
  const auto& K = kern::active();
  const int k = w.h;
  const int oh = gy.h, ow = gy.w;
  if (gw.data.empty()) gw = Tensor(w.b, w.c, w.h, w.w);
  if (gb.data.empty()) gb = Tensor(1, w.b, 1, 1);
  if (gx) *gx = Tensor(x.b, x.c, x.h, x.w);

  for (int ib = 0; ib < x.b; ++ib) {
    for (int co = 0; co < w.b; ++co) {
      const double* gp = gy.plane(ib, co);
      gb.data[co] += K.sum(gp, gy.plane_size());

      if (stride == 1) {
        for (int ci = 0; ci < x.c; ++ci) {
          const double* xp = x.plane(ib, ci);
          double* gxp = gx ? gx->plane(ib, ci) : nullptr;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int ox0 = std::max(0, pad - kx);
              const int ox1 = std::min(ow - 1, x.w - 1 + pad - kx);
              if (ox1 < ox0) continue;
              const int len = ox1 - ox0 + 1;
              const double wv = w.at(co, ci, ky, kx);
              double gwv = 0.0;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy + ky - pad;
                if (iy < 0 || iy >= x.h) continue;
                const double* gr = gp + static_cast<std::size_t>(oy) * ow + ox0;
                const double* xr = xp + static_cast<std::size_t>(iy) * x.w + (ox0 + kx - pad);
                gwv += K.dot(gr, xr, len);
                if (gxp)
                  K.axpy(wv, gr, gxp + static_cast<std::size_t>(iy) * x.w + (ox0 + kx - pad), len);
              }
              gw.at(co, ci, ky, kx) += gwv;
            }
          }
        }
      } else if (stride == k && pad == 0) {
        for (int oy = 0; oy < oh; ++oy) {
          for (int ox = 0; ox < ow; ++ox) {
            const double g = gp[static_cast<std::size_t>(oy) * ow + ox];
            if (g == 0.0) continue;
            for (int ci = 0; ci < x.c; ++ci) {
              const double* xp = x.plane(ib, ci);
              for (int ky = 0; ky < k; ++ky) {
                const std::size_t xoff = static_cast<std::size_t>(oy * k + ky) * x.w + ox * k;
                K.axpy(g, xp + xoff, &gw.at(co, ci, ky, 0), k);
                if (gx) K.axpy(g, &w.at(co, ci, ky, 0), gx->plane(ib, ci) + xoff, k);
              }
            }
          }
        }
      } else {
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            const double g = gp[static_cast<std::size_t>(oy) * ow + ox];
            if (g == 0.0) continue;
            for (int ci = 0; ci < x.c; ++ci)
              for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                  const int iy = oy * stride + ky - pad;
                  const int ix = ox * stride + kx - pad;
                  if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                  gw.at(co, ci, ky, kx) += g * x.at(ib, ci, iy, ix);
                  if (gx) gx->at(ib, ci, iy, ix) += g * w.at(co, ci, ky, kx);
                }
          }
      }
    }
  }
}

Tensor transposed_conv2d(const Tensor& x, const Tensor& w, const Tensor& bias) {
  if (w.b != x.c)
    throw std::invalid_argument("transposed_conv2d: kernel expects " + std::to_string(w.b) +
                                " input channels, got " + std::to_string(x.c));
  if (w.h != 2 || w.w != 2)
    throw std::invalid_argument("transposed_conv2d: kernel must be 2x2");
  if (bias.c != w.c || bias.b != 1 || bias.h != 1 || bias.w != 1)
    throw std::invalid_argument("transposed_conv2d: bias shape mismatch");
  const int cout = w.c;
  Tensor y(x.b, cout, 2 * x.h, 2 * x.w);

  for (int ib = 0; ib < x.b; ++ib) {
    for (int co = 0; co < cout; ++co) {
      double* yp = y.plane(ib, co);
      const double bv = bias.data[co];
      for (std::size_t i = 0; i < y.plane_size(); ++i) yp[i] = bv;
      for (int ci = 0; ci < x.c; ++ci) {
        const double* xp = x.plane(ib, ci);
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const double wv = w.at(ci, co, dy, dx);
            if (wv == 0.0) continue;
            for (int iy = 0; iy < x.h; ++iy) {
              const double* xr = xp + static_cast<std::size_t>(iy) * x.w;
              double* yr = yp + static_cast<std::size_t>(2 * iy + dy) * y.w + dx;
              for (int ix = 0; ix < x.w; ++ix) yr[2 * ix] += wv * xr[ix];
            }
          }
      }
    }
  }
  return y;
}

void transposed_conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                                Tensor* gx, Tensor& gw, Tensor& gb) {
  const auto& K = kern::active();
  if (gw.data.empty()) gw = Tensor(w.b, w.c, 2, 2);
  if (gb.data.empty()) gb = Tensor(1, w.c, 1, 1);
  if (gx) *gx = Tensor(x.b, x.c, x.h, x.w);

  for (int ib = 0; ib < x.b; ++ib) {
    for (int co = 0; co < w.c; ++co) {
      const double* gp = gy.plane(ib, co);
      gb.data[co] += K.sum(gp, gy.plane_size());
      for (int ci = 0; ci < x.c; ++ci) {
        const double* xp = x.plane(ib, ci);
        double* gxp = gx ? gx->plane(ib, ci) : nullptr;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const double wv = w.at(ci, co, dy, dx);
            double gwv = 0.0;
            for (int iy = 0; iy < x.h; ++iy) {
              const double* xr = xp + static_cast<std::size_t>(iy) * x.w;
              const double* gr = gp + static_cast<std::size_t>(2 * iy + dy) * gy.w + dx;
              double* gxr = gxp ? gxp + static_cast<std::size_t>(iy) * x.w : nullptr;
              for (int ix = 0; ix < x.w; ++ix) {
                gwv += gr[2 * ix] * xr[ix];
                if (gxr) gxr[ix] += wv * gr[2 * ix];
              }
            }
            gw.at(ci, co, dy, dx) += gwv;
          }
      }
    }
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor y(a.b, a.c, a.h, a.w);
  kern::active().add(a.data.data(), b.data.data(), y.data.data(), y.size());
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("mul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Tensor y(a.b, a.c, a.h, a.w);
  kern::active().mul(a.data.data(), b.data.data(), y.data.data(), y.size());
  return y;
}

Tensor scale(const Tensor& a, double s) {
  Tensor y(a.b, a.c, a.h, a.w);
  kern::active().scale(a.data.data(), s, y.data.data(), y.size());
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.b, x.c, x.h, x.w);
  kern::active().relu(x.data.data(), y.data.data(), y.size());
  return y;
}

void relu_backward(const Tensor& x, const Tensor& gy, Tensor& gx) {
  if (gx.data.empty()) gx = Tensor(x.b, x.c, x.h, x.w);
  kern::active().relu_bwd(x.data.data(), gy.data.data(), gx.data.data(), x.size());
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.b, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = x.data[i];
    // stable in both tails
    y.data[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                         : std::exp(z) / (1.0 + std::exp(z));
  }
  return y;
}

void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx) {
  if (gx.data.empty()) gx = Tensor(y.b, y.c, y.h, y.w);
  for (std::size_t i = 0; i < y.size(); ++i)
    gx.data[i] += gy.data[i] * y.data[i] * (1.0 - y.data[i]);
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
  const Tensor& first = *parts[0];
  int ctot = 0;
  for (const Tensor* p : parts) {
    if (p->b != first.b || p->h != first.h || p->w != first.w)
      throw std::invalid_argument("concat_channels: B/H/W mismatch " + p->shape_str() + " vs " +
                                  first.shape_str());
    ctot += p->c;
  }
  Tensor y(first.b, ctot, first.h, first.w);
  for (int ib = 0; ib < first.b; ++ib) {
    int co = 0;
    for (const Tensor* p : parts)
      for (int ci = 0; ci < p->c; ++ci, ++co)
        std::copy_n(p->plane(ib, ci), p->plane_size(), y.plane(ib, co));
  }
  return y;
}

std::vector<Tensor> split_channels(const Tensor& gy, const std::vector<int>& channel_counts) {
  std::vector<Tensor> out;
  int c0 = 0;
  for (int cc : channel_counts) {
    Tensor g(gy.b, cc, gy.h, gy.w);
    for (int ib = 0; ib < gy.b; ++ib)
      for (int ci = 0; ci < cc; ++ci)
        std::copy_n(gy.plane(ib, c0 + ci), gy.plane_size(), g.plane(ib, ci));
    out.push_back(std::move(g));
    c0 += cc;
  }
  if (c0 != gy.c) throw std::invalid_argument("split_channels: counts do not sum to C");
  return out;
}

void softmax_vec(double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - m);
    s += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= s;
}

Tensor softmax_channels(const Tensor& x) {
  Tensor y(x.b, x.c, x.h, x.w);
  std::vector<double> col(x.c);
  for (int ib = 0; ib < x.b; ++ib)
    for (int iy = 0; iy < x.h; ++iy)
      for (int ix = 0; ix < x.w; ++ix) {
        for (int ci = 0; ci < x.c; ++ci) col[ci] = x.at(ib, ci, iy, ix);
        softmax_vec(col.data(), x.c);
        for (int ci = 0; ci < x.c; ++ci) y.at(ib, ci, iy, ix) = col[ci];
      }
  return y;
}

Tensor avg_pool2(const Tensor& x) {
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw std::invalid_argument("avg_pool2: H and W must be even, got " + x.shape_str());
  Tensor y(x.b, x.c, x.h / 2, x.w / 2);
  for (int ib = 0; ib < x.b; ++ib)
    for (int ic = 0; ic < x.c; ++ic)
      for (int oy = 0; oy < y.h; ++oy) {
        const double* r0 = x.row(ib, ic, 2 * oy);
        const double* r1 = x.row(ib, ic, 2 * oy + 1);
        double* yr = y.row(ib, ic, oy);
        for (int ox = 0; ox < y.w; ++ox)
          yr[ox] = (r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1]) * 0.25;
      }
  return y;
}

Tensor avg_pool2_backward(const Tensor& gy) {
  Tensor gx(gy.b, gy.c, gy.h * 2, gy.w * 2);
  for (int ib = 0; ib < gy.b; ++ib)
    for (int ic = 0; ic < gy.c; ++ic)
      for (int oy = 0; oy < gy.h; ++oy) {
        const double* gr = gy.row(ib, ic, oy);
        double* r0 = gx.row(ib, ic, 2 * oy);
        double* r1 = gx.row(ib, ic, 2 * oy + 1);
        for (int ox = 0; ox < gy.w; ++ox) {
          const double g = gr[ox] * 0.25;
          r0[2 * ox] = g;
          r0[2 * ox + 1] = g;
          r1[2 * ox] = g;
          r1[2 * ox + 1] = g;
        }
      }
  return gx;
}

namespace {
// corner-aligned source coordinate for output index i
inline void bilin_taps(int i, int out_dim, int in_dim, int& i0, int& i1, double& f) {
  if (out_dim == 1 || in_dim == 1) {
    i0 = i1 = 0;
    f = 0.0;
    return;
  }
  const double pos = static_cast<double>(i) * (in_dim - 1) / (out_dim - 1);
  i0 = static_cast<int>(pos);
  if (i0 >= in_dim - 1) i0 = in_dim - 2;
  i1 = i0 + 1;
  f = pos - i0;
}
} // namespace

Tensor upsample_bilinear(const Tensor& x, int out_h, int out_w) {
  Tensor y(x.b, x.c, out_h, out_w);
  for (int ib = 0; ib < x.b; ++ib)
    for (int ic = 0; ic < x.c; ++ic) {
      const double* xp = x.plane(ib, ic);
      double* yp = y.plane(ib, ic);
      for (int oy = 0; oy < out_h; ++oy) {
        int y0, y1;
        double fy;
        bilin_taps(oy, out_h, x.h, y0, y1, fy);
        for (int ox = 0; ox < out_w; ++ox) {
          int x0, x1;
          double fx;
          bilin_taps(ox, out_w, x.w, x0, x1, fx);
          const double v00 = xp[static_cast<std::size_t>(y0) * x.w + x0];
          const double v01 = xp[static_cast<std::size_t>(y0) * x.w + x1];
          const double v10 = xp[static_cast<std::size_t>(y1) * x.w + x0];
          const double v11 = xp[static_cast<std::size_t>(y1) * x.w + x1];
          yp[static_cast<std::size_t>(oy) * out_w + ox] =
              (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
        }
      }
    }
  return y;
}

Tensor upsample_bilinear_backward(const Tensor& gy, int in_h, int in_w) {
  Tensor gx(gy.b, gy.c, in_h, in_w);
  for (int ib = 0; ib < gy.b; ++ib)
    for (int ic = 0; ic < gy.c; ++ic) {
      const double* gp = gy.plane(ib, ic);
      double* gxp = gx.plane(ib, ic);
      for (int oy = 0; oy < gy.h; ++oy) {
        int y0, y1;
        double fy;
        bilin_taps(oy, gy.h, in_h, y0, y1, fy);
        for (int ox = 0; ox < gy.w; ++ox) {
          int x0, x1;
          double fx;
          bilin_taps(ox, gy.w, in_w, x0, x1, fx);
          const double g = gp[static_cast<std::size_t>(oy) * gy.w + ox];
          gxp[static_cast<std::size_t>(y0) * in_w + x0] += (1.0 - fy) * (1.0 - fx) * g;
          gxp[static_cast<std::size_t>(y0) * in_w + x1] += (1.0 - fy) * fx * g;
          gxp[static_cast<std::size_t>(y1) * in_w + x0] += fy * (1.0 - fx) * g;
          gxp[static_cast<std::size_t>(y1) * in_w + x1] += fy * fx * g;
        }
      }
    }
  return gx;
}

Tensor global_avg_pool(const Tensor& x) {
  Tensor y(x.b, x.c, 1, 1);
  const double inv = 1.0 / static_cast<double>(x.plane_size());
  for (int ib = 0; ib < x.b; ++ib)
    for (int ic = 0; ic < x.c; ++ic)
      y.at(ib, ic, 0, 0) = kern::active().sum(x.plane(ib, ic), x.plane_size()) * inv;
  return y;
}

Tensor global_avg_pool_backward(const Tensor& gy, int in_h, int in_w) {
  Tensor gx(gy.b, gy.c, in_h, in_w);
  const double inv = 1.0 / (static_cast<double>(in_h) * in_w);
  for (int ib = 0; ib < gy.b; ++ib)
    for (int ic = 0; ic < gy.c; ++ic) {
      const double g = gy.at(ib, ic, 0, 0) * inv;
      double* p = gx.plane(ib, ic);
      for (std::size_t i = 0; i < gx.plane_size(); ++i) p[i] = g;
    }
  return gx;
}

// ---------------------------------------------------------------------------

Conv2dLayer::Conv2dLayer(std::string name, int cin, int cout, int k, int stride, int pad)
    : name_(std::move(name)), cin_(cin), cout_(cout), k_(k), stride_(stride), pad_(pad) {}

void Conv2dLayer::init(ParamStore& ps, Rng& rng, bool trainable, Init kind) {
  Tensor w(cout_, cin_, k_, k_);
  if (kind == Init::He) {
    const double std = std::sqrt(2.0 / (static_cast<double>(cin_) * k_ * k_));
    for (double& v : w.data) v = rng.normal(0.0, std);
  }
  ps.add(name_ + ".w", std::move(w), trainable);
  ps.add(name_ + ".b", Tensor(1, cout_, 1, 1), trainable);
}

Tensor Conv2dLayer::forward(const Tensor& x, ParamStore& ps) {
  x_ = x;
  return conv2d(x, ps.value(name_ + ".w"), ps.value(name_ + ".b"), stride_, pad_);
}

Tensor Conv2dLayer::backward(const Tensor& gy, ParamStore& ps, bool need_gx) {
  Tensor gw, gb, gx;
  conv2d_backward(x_, ps.value(name_ + ".w"), gy, stride_, pad_, need_gx ? &gx : nullptr, gw, gb);
  ps.accumulate_grad(name_ + ".w", gw);
  ps.accumulate_grad(name_ + ".b", gb);
  return gx;
}

TConv2dLayer::TConv2dLayer(std::string name, int cin, int cout)
    : name_(std::move(name)), cin_(cin), cout_(cout) {}

void TConv2dLayer::init(ParamStore& ps, Rng& rng, bool trainable) {
  Tensor w(cin_, cout_, 2, 2);
  const double std = std::sqrt(2.0 / static_cast<double>(cin_));
  for (double& v : w.data) v = rng.normal(0.0, std);
  ps.add(name_ + ".w", std::move(w), trainable);
  ps.add(name_ + ".b", Tensor(1, cout_, 1, 1), trainable);
}

Tensor TConv2dLayer::forward(const Tensor& x, ParamStore& ps) {
  x_ = x;
  return transposed_conv2d(x, ps.value(name_ + ".w"), ps.value(name_ + ".b"));
}

Tensor TConv2dLayer::backward(const Tensor& gy, ParamStore& ps, bool need_gx) {
  Tensor gw, gb, gx;
  transposed_conv2d_backward(x_, ps.value(name_ + ".w"), gy, need_gx ? &gx : nullptr, gw, gb);
  ps.accumulate_grad(name_ + ".w", gw);
  ps.accumulate_grad(name_ + ".b", gb);
  return gx;
}

} // namespace freqseg
