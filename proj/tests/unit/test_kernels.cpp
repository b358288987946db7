#include <doctest.h>

#include <cstring>
#include <vector>

#include "freqseg/kernels.hpp"
#include "freqseg/rng.hpp"

using namespace freqseg;

namespace {

std::vector<double> randvec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

} // namespace

TEST_SUITE("kernels") {

// Every vector backend must reproduce the scalar reference bit-for-bit,
// including the interleaved reduction order and remainder tails.
TEST_CASE("avx2 matches scalar bitwise on all kernels and tail sizes") {
  const kern::Table* v = kern::avx2();
  if (!v) return; // CPU or build without AVX2
  const kern::Table& s = kern::scalar();
  Rng rng(42);

  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 67, 1000, 1003}) {
    std::vector<double> x = randvec(rng, n), y = randvec(rng, n);
    std::vector<double> a(n), b(n);

    s.add(x.data(), y.data(), a.data(), n);
    v->add(x.data(), y.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    s.sub(x.data(), y.data(), a.data(), n);
    v->sub(x.data(), y.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    s.mul(x.data(), y.data(), a.data(), n);
    v->mul(x.data(), y.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    s.scale(x.data(), 1.7, a.data(), n);
    v->scale(x.data(), 1.7, b.data(), n);
    CHECK(bits_equal(a, b));

    a = y;
    b = y;
    s.axpy(-0.3, x.data(), a.data(), n);
    v->axpy(-0.3, x.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    a = y;
    b = y;
    s.mul_acc(x.data(), y.data(), a.data(), n);
    v->mul_acc(x.data(), y.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    s.relu(x.data(), a.data(), n);
    v->relu(x.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    a = y;
    b = y;
    s.relu_bwd(x.data(), x.data(), a.data(), n);
    v->relu_bwd(x.data(), x.data(), b.data(), n);
    CHECK(bits_equal(a, b));

    CHECK(s.sum(x.data(), n) == v->sum(x.data(), n));
    CHECK(s.dot(x.data(), y.data(), n) == v->dot(x.data(), y.data(), n));
    CHECK(s.max_abs(x.data(), n) == v->max_abs(x.data(), n));
  }
}

TEST_CASE("avx2 adam step matches scalar bitwise") {
  const kern::Table* v = kern::avx2();
  if (!v) return;
  const kern::Table& s = kern::scalar();
  Rng rng(7);

  for (std::size_t n : {1, 4, 5, 33, 130}) {
    std::vector<double> theta = randvec(rng, n), g = randvec(rng, n);
    std::vector<double> m(n, 0.0), vv(n, 0.0);
    auto theta2 = theta;
    auto m2 = m, vv2 = vv;
    const double c1 = 1.0 / (1.0 - 0.9), c2 = 1.0 / (1.0 - 0.999);
    s.adam_step(theta.data(), g.data(), m.data(), vv.data(), n, 1e-3, 0.9, 0.999, 1e-8, c1, c2);
    v->adam_step(theta2.data(), g.data(), m2.data(), vv2.data(), n, 1e-3, 0.9, 0.999, 1e-8, c1, c2);
    CHECK(bits_equal(theta, theta2));
    CHECK(bits_equal(m, m2));
    CHECK(bits_equal(vv, vv2));
  }
}

TEST_CASE("reduction semantics agree with a plain sequential sum") {
  Rng rng(3);
  std::vector<double> x = randvec(rng, 257);
  double plain = 0.0;
  for (double v : x) plain += v;
  CHECK(kern::scalar().sum(x.data(), x.size()) == doctest::Approx(plain).epsilon(1e-13));
}

TEST_CASE("active table is scalar or avx2 and stable") {
  const kern::Table& t = kern::active();
  CHECK((std::string(t.name) == "scalar" || std::string(t.name) == "avx2"));
  CHECK(&kern::active() == &t);
}

} // TEST_SUITE
