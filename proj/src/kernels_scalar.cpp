#include "freqseg/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace freqseg::kern {
namespace {

void add_s(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_s(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void mul_s(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void scale_s(const double* x, double a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void axpy_s(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul_acc_s(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += x[i] * y[i];
}

void relu_s(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_s(const double* x, const double* gy, double* gx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) gx[i] += gy[i];
}

double sum_s(const double* x, std::size_t n) {
  double t[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) t[i & 3] += x[i];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

double dot_s(const double* x, const double* y, std::size_t n) {
  double t[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) t[i & 3] += x[i] * y[i];
  return (t[0] + t[1]) + (t[2] + t[3]);
}

double max_abs_s(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void adam_step_s(double* theta, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double c1, double c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    const double mhat = m[i] * c1;
    const double vhat = v[i] * c2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

} // namespace

const Table& scalar() {
  static const Table t = {
      .name = "scalar",
      .add = add_s,
      .sub = sub_s,
      .mul = mul_s,
      .scale = scale_s,
      .axpy = axpy_s,
      .mul_acc = mul_acc_s,
      .relu = relu_s,
      .relu_bwd = relu_bwd_s,
      .sum = sum_s,
      .dot = dot_s,
      .max_abs = max_abs_s,
      .adam_step = adam_step_s,
  };
  return t;
}

} // namespace freqseg::kern
