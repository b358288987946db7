#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace freqseg {

// splitmix64; used to derive independent streams from one config seed
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& tag, std::uint64_t n = 0) {
  std::uint64_t h = 1469598103934665603ULL; // FNV-1a over the tag
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return mix_seed(master ^ mix_seed(h ^ (n * 0x9e3779b97f4a7c15ULL)));
}

// mt19937_64 with hand-rolled distributions: sequences do not depend on the
// standard library's distribution internals, and there is no hidden cache, so
// a stream replays identically from its seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; } // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box–Muller, both uniforms drawn fresh each call
  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(gen_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

} // namespace freqseg
