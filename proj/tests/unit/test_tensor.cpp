#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "freqseg/rng.hpp"
#include "freqseg/tensor.hpp"

using namespace freqseg;

TEST_SUITE("tensor") {

TEST_CASE("construction and indexing") {
  Tensor t(2, 3, 4, 5);
  CHECK(t.size() == 120);
  CHECK(t.plane_size() == 20);
  t.at(1, 2, 3, 4) = 7.5;
  CHECK(t.data[119] == 7.5);
  CHECK(t.shape_str() == "(2,3,4,5)");
  CHECK_THROWS_AS(Tensor(0, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("finiteness scan") {
  Tensor t(1, 1, 2, 2, 1.0);
  CHECK(t.all_finite());
  t.data[2] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("fqt1 round-trip preserves bits") {
  Rng rng(11);
  Tensor t(2, 3, 4, 4);
  for (double& v : t.data) v = rng.normal();
  std::stringstream ss;
  write_fqt(t, ss);
  Tensor u = read_fqt(ss);
  CHECK(u.b == t.b);
  CHECK(u.c == t.c);
  CHECK(u.h == t.h);
  CHECK(u.w == t.w);
  CHECK(u.data == t.data);
}

TEST_CASE("fqt1 rejects bad magic and truncation") {
  std::stringstream ss;
  ss << "NOPE";
  CHECK_THROWS_AS(read_fqt(ss), std::runtime_error);

  Tensor t(1, 1, 2, 2, 1.0);
  std::stringstream ok;
  write_fqt(t, ok);
  std::string bytes = ok.str();
  bytes.resize(bytes.size() - 8);
  std::stringstream cut(bytes);
  CHECK_THROWS_AS(read_fqt(cut), std::runtime_error);
}

TEST_CASE("fqt1 file save/load") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "freqseg_t.fqt";
  Tensor t = scalar_tensor(0.25);
  save_tensor(t, path.string());
  Tensor u = load_tensor(path.string());
  CHECK(u.data[0] == 0.25);
  fs::remove(path);
}

} // TEST_SUITE
