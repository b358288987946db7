#include "freqseg/kernels.hpp"

#include <cstdlib>
#include <string>

namespace freqseg::kern {

#if FREQSEG_HAVE_AVX2_BUILD
const Table* avx2_table_impl(); // kernels_avx2.cpp
#endif

const Table* avx2() {
#if FREQSEG_HAVE_AVX2_BUILD
  if (__builtin_cpu_supports("avx2")) return avx2_table_impl();
#endif
  return nullptr;
}

namespace {
const Table& pick() {
  const char* env = std::getenv("FREQSEG_KERNEL");
  const std::string mode = env ? env : "auto";
  if (mode == "scalar") return scalar();
  if (const Table* v = avx2(); v && (mode == "auto" || mode == "avx2")) return *v;
  return scalar();
}
} // namespace

const Table& active() {
  static const Table& t = pick();
  return t;
}

} // namespace freqseg::kern
