#include "freqseg/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace freqseg {

Tensor::Tensor(int b_, int c_, int h_, int w_, double fill)
    : b(b_), c(c_), h(h_), w(w_) {
  if (b < 1 || c < 1 || h < 1 || w < 1)
    throw std::invalid_argument("Tensor: all dims must be >= 1, got " + shape_str());
  data.assign(static_cast<std::size_t>(b) * c * h * w, fill);
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(" << b << "," << c << "," << h << "," << w << ")";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor scalar_tensor(double v) {
  Tensor t(1, 1, 1, 1);
  t.data[0] = v;
  return t;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("FQT1: truncated header");
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

} // namespace

void write_fqt(const Tensor& t, std::ostream& os) {
  os.write("FQT1", 4);
  put_u32(os, 4);
  put_u32(os, static_cast<std::uint32_t>(t.b));
  put_u32(os, static_cast<std::uint32_t>(t.c));
  put_u32(os, static_cast<std::uint32_t>(t.h));
  put_u32(os, static_cast<std::uint32_t>(t.w));
  // this build targets little-endian hosts; doubles go out raw
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_fqt(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FQT1", 4) != 0)
    throw std::runtime_error("FQT1: bad magic");
  const std::uint32_t rank = get_u32(is);
  if (rank < 1 || rank > 4) throw std::runtime_error("FQT1: unsupported rank");
  std::uint32_t dims[4] = {1, 1, 1, 1};
  for (std::uint32_t i = 0; i < rank; ++i) dims[4 - rank + i] = get_u32(is); // leading dims pad to 1
  Tensor t(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
           static_cast<int>(dims[3]));
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("FQT1: truncated payload");
  return t;
}

void save_tensor(const Tensor& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_fqt(t, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return read_fqt(is);
}

} // namespace freqseg
