#pragma once

#include <cstddef>

// Data-parallel inner-loop kernels. One scalar reference implementation plus
// vector backends selected once at startup. Backends must reproduce the scalar
// reference bit-for-bit:
//   - lane-parallel ops (add/mul/scale/axpy/relu/adam) are exact because each
//     output element is an independent mul/add chain and the project is built
//     with -ffp-contract=off (no FMA contraction anywhere);
//   - the reductions (sum/dot) are DEFINED to accumulate into four interleaved
//     partial sums, lane = i & 3, combined as (s0+s1)+(s2+s3) — exactly what a
//     4-wide f64 register produces.
// Selection: FREQSEG_KERNEL=scalar|avx2|auto (default auto).

namespace freqseg::kern {

struct Table {
  const char* name;

  // elementwise, out may alias x or y
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  void (*scale)(const double* x, double a, double* out, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);          // y += a*x
  void (*mul_acc)(const double* x, const double* y, double* out, std::size_t n); // out += x*y
  void (*relu)(const double* x, double* out, std::size_t n);
  void (*relu_bwd)(const double* x, const double* gy, double* gx, std::size_t n); // gx += gy * [x > 0]

  // reductions (4-lane interleaved accumulation)
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);

  // fused Adam update; c1 = 1/(1-b1^t), c2 = 1/(1-b2^t)
  void (*adam_step)(double* theta, const double* g, double* m, double* v, std::size_t n,
                    double lr, double b1, double b2, double eps, double c1, double c2);
};

const Table& scalar();
const Table* avx2();    // nullptr when the CPU or build lacks AVX2
const Table& active();  // runtime-selected, stable for the process lifetime

} // namespace freqseg::kern
