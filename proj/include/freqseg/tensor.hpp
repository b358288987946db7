#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace freqseg {

// Dense rank-4 (batch, channels, height, width) f64 array, row-major.
// The universal currency between modules. Immutable by convention once built;
// all operators allocate fresh outputs.
struct Tensor {
  int b = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int b_, int c_, int h_, int w_, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  bool same_shape(const Tensor& o) const { return b == o.b && c == o.c && h == o.h && w == o.w; }
  std::string shape_str() const;

  double* plane(int ib, int ic) {
    return data.data() + (static_cast<std::size_t>(ib) * c + ic) * plane_size();
  }
  const double* plane(int ib, int ic) const {
    return data.data() + (static_cast<std::size_t>(ib) * c + ic) * plane_size();
  }
  double* row(int ib, int ic, int iy) { return plane(ib, ic) + static_cast<std::size_t>(iy) * w; }
  const double* row(int ib, int ic, int iy) const {
    return plane(ib, ic) + static_cast<std::size_t>(iy) * w;
  }
  double& at(int ib, int ic, int iy, int ix) { return row(ib, ic, iy)[ix]; }
  const double& at(int ib, int ic, int iy, int ix) const { return row(ib, ic, iy)[ix]; }

  bool all_finite() const;
};

// scalar convenience (1,1,1,1)
Tensor scalar_tensor(double v);

// FQT1 dump format: magic "FQT1", u32 rank, u32 dims..., then f64 payload in
// row-major order, everything little-endian.
void write_fqt(const Tensor& t, std::ostream& os);
Tensor read_fqt(std::istream& is);
void save_tensor(const Tensor& t, const std::string& path);
Tensor load_tensor(const std::string& path);

} // namespace freqseg
