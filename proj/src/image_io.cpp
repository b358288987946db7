#include "freqseg/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace freqseg {

namespace {

void write_p5(const std::vector<unsigned char>& px, int h, int w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << "P5\n" << w << " " << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

struct P5 {
  int h = 0, w = 0;
  std::vector<unsigned char> px;
};

P5 read_p5(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw std::runtime_error("not a binary PGM (P5): " + path);
  auto next_int = [&is, &path]() {
    // skip whitespace and '#' comment lines
    for (;;) {
      const int c = is.peek();
      if (c == '#') {
        std::string junk;
        std::getline(is, junk);
      } else if (std::isspace(c)) {
        is.get();
      } else {
        break;
      }
    }
    int v = 0;
    if (!(is >> v)) throw std::runtime_error("bad PGM header: " + path);
    return v;
  };
  P5 out;
  out.w = next_int();
  out.h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw std::runtime_error("only 8-bit PGM supported: " + path);
  is.get(); // single whitespace after maxval
  out.px.resize(static_cast<std::size_t>(out.h) * out.w);
  is.read(reinterpret_cast<char*>(out.px.data()), static_cast<std::streamsize>(out.px.size()));
  if (!is) throw std::runtime_error("truncated PGM: " + path);
  return out;
}

} // namespace

void write_pgm(const Tensor& img, const std::string& path) {
  if (img.b != 1 || img.c != 1)
    throw std::invalid_argument("write_pgm: expected (1,1,H,W), got " + img.shape_str());
  std::vector<unsigned char> px(img.plane_size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = std::clamp(img.data[i], 0.0, 1.0);
    px[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  write_p5(px, img.h, img.w, path);
}

Tensor read_pgm(const std::string& path) {
  P5 p = read_p5(path);
  Tensor t(1, 1, p.h, p.w);
  for (std::size_t i = 0; i < p.px.size(); ++i) t.data[i] = p.px[i] / 255.0;
  return t;
}

void write_mask_pgm(const Tensor& mask, const std::string& path) {
  if (mask.b != 1 || mask.c != 1)
    throw std::invalid_argument("write_mask_pgm: expected (1,1,H,W), got " + mask.shape_str());
  std::vector<unsigned char> px(mask.plane_size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.data[i] >= 0.5 ? 255 : 0;
  write_p5(px, mask.h, mask.w, path);
}

Tensor read_mask_pgm(const std::string& path) {
  P5 p = read_p5(path);
  Tensor t(1, 1, p.h, p.w);
  for (std::size_t i = 0; i < p.px.size(); ++i) t.data[i] = p.px[i] >= 128 ? 1.0 : 0.0;
  return t;
}

void write_pgm_normalized(const Tensor& plane, const std::string& path) {
  if (plane.b != 1 || plane.c != 1)
    throw std::invalid_argument("write_pgm_normalized: expected (1,1,H,W), got " +
                                plane.shape_str());
  double lo = plane.data[0], hi = plane.data[0];
  for (double v : plane.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  Tensor norm(1, 1, plane.h, plane.w);
  for (std::size_t i = 0; i < plane.size(); ++i)
    norm.data[i] = span > 0.0 ? (plane.data[i] - lo) / span : 0.5;
  write_pgm(norm, path);
}

} // namespace freqseg
