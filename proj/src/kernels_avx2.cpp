// AVX2 (4 x f64) backend. Built only on x86-64 (-mavx2 on this TU); callers
// must gate on the runtime CPU check in kernels_dispatch.cpp.
//
// No FMA: every kernel uses separate mul/add so results match the scalar
// reference bit-for-bit. Reduction tails fold leftover elements into the
// vector lanes they would have occupied (lane = i & 3).

#include "freqseg/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace freqseg::kern {
namespace {

void add_v(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_v(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_v(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void scale_v(const double* x, double a, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void axpy_v(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d p = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void mul_acc_v(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), p));
  }
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

void relu_v(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_v(const double* x, const double* gy, double* gx, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    __m256d old = _mm256_loadu_pd(gx + i);
    __m256d upd = _mm256_add_pd(old, _mm256_loadu_pd(gy + i));
    // blend keeps untouched lanes bit-identical (a masked add would turn -0.0 into +0.0)
    _mm256_storeu_pd(gx + i, _mm256_blendv_pd(old, upd, mask));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) gx[i] += gy[i];
}

double sum_v(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  for (; i < n; ++i) t[i & 3] += x[i];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

double dot_v(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, p);
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  for (; i < n; ++i) t[i & 3] += x[i] * y[i];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

double max_abs_v(const double* x, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4)
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  double m = std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void adam_step_v(double* theta, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double c1, double c2) {
  const __m256d b1v = _mm256_set1_pd(b1), ob1 = _mm256_set1_pd(1.0 - b1);
  const __m256d b2v = _mm256_set1_pd(b2), ob2 = _mm256_set1_pd(1.0 - b2);
  const __m256d c1v = _mm256_set1_pd(c1), c2v = _mm256_set1_pd(c2);
  const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  std::size_t i = 0, n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ob1, gv));
    __m256d g2 = _mm256_mul_pd(gv, gv);
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)), _mm256_mul_pd(ob2, g2));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_mul_pd(mv, c1v);
    __m256d vhat = _mm256_mul_pd(vv, c2v);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
    _mm256_storeu_pd(theta + i, _mm256_sub_pd(_mm256_loadu_pd(theta + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    theta[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

} // namespace

const Table* avx2_table_impl() {
  static const Table t = {
      .name = "avx2",
      .add = add_v,
      .sub = sub_v,
      .mul = mul_v,
      .scale = scale_v,
      .axpy = axpy_v,
      .mul_acc = mul_acc_v,
      .relu = relu_v,
      .relu_bwd = relu_bwd_v,
      .sum = sum_v,
      .dot = dot_v,
      .max_abs = max_abs_v,
      .adam_step = adam_step_v,
  };
  return &t;
}

} // namespace freqseg::kern
