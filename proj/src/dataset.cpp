#include "freqseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "freqseg/image_io.hpp"
#include "freqseg/rng.hpp"

namespace fs = std::filesystem;

namespace freqseg {

namespace {

struct Ellipse {
  double cx, cy, a, b, theta;
  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = dx * std::cos(theta) + dy * std::sin(theta);
    const double v = -dx * std::sin(theta) + dy * std::cos(theta);
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  }
};

Tensor gaussian_blur(const Tensor& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    ksum += k[i + radius];
  }
  for (double& v : k) v /= ksum;

  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v >= hi ? hi - 1 : v); };
  Tensor tmp(1, 1, img.h, img.w), out(1, 1, img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * img.at(0, 0, y, clampi(x + i, img.w));
      tmp.at(0, 0, y, x) = acc;
    }
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp.at(0, 0, clampi(y + i, img.h), x);
      out.at(0, 0, y, x) = acc;
    }
  return out;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    default: return "test";
  }
}

} // namespace

Sample make_sample(std::uint64_t seed, int index, int size, bool shift) {
  Rng rng(derive_seed(seed, "sample", static_cast<std::uint64_t>(index)));
  const double s = static_cast<double>(size);

  Tensor mask(1, 1, size, size);
  for (int attempt = 0; attempt < 200; ++attempt) {
    mask.data.assign(mask.size(), 0.0);
    const int k = rng.uniform_int(1, 3);
    std::vector<Ellipse> es(k);
    for (auto& e : es) {
      e.cx = rng.uniform(0.25, 0.75) * s;
      e.cy = rng.uniform(0.25, 0.75) * s;
      e.a = rng.uniform(0.10, 0.32) * s;
      e.b = rng.uniform(0.10, 0.32) * s;
      e.theta = rng.uniform(0.0, 3.14159265358979323846);
    }
    std::size_t fg = 0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        for (const auto& e : es)
          if (e.contains(x + 0.5, y + 0.5)) {
            mask.at(0, 0, y, x) = 1.0;
            ++fg;
            break;
          }
    const double frac = static_cast<double>(fg) / (s * s);
    if (frac > 0.02 && frac < 0.6) break;
    if (attempt == 199)
      throw std::runtime_error("dataset generator: could not satisfy the mask-fraction rule");
  }

  // degradations: soft boundary, multiplicative speckle, low contrast
  const double sigma_blur = shift ? rng.uniform(2.0, 4.0) : rng.uniform(1.0, 3.0);
  const double speckle_std = shift ? rng.uniform(0.2, 0.4) : rng.uniform(0.1, 0.3);
  const double gap = shift ? rng.uniform(0.10, 0.25) : rng.uniform(0.15, 0.4);
  const double bg = rng.uniform(0.15, 0.45);

  Tensor img(1, 1, size, size);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = bg + gap * mask.data[i];
  img = gaussian_blur(img, sigma_blur);
  for (double& v : img.data) {
    v *= 1.0 + rng.normal(0.0, speckle_std);
    v = std::clamp(v, 0.0, 1.0);
    v = std::round(v * 255.0) / 255.0; // match the 8-bit on-disk form exactly
  }

  Sample out;
  std::ostringstream id;
  id << "s" << std::setw(5) << std::setfill('0') << index;
  out.id = id.str();
  out.image = std::move(img);
  out.mask = std::move(mask);
  return out;
}

void generate_dataset(const RunConfig& cfg, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "masks");

  // deterministic split: shuffle indices, floor-portion train and val, rest test
  std::vector<int> order(cfg.n);
  for (int i = 0; i < cfg.n; ++i) order[i] = i;
  Rng split_rng(derive_seed(cfg.seed, "split"));
  split_rng.shuffle(order);
  const int total = cfg.split_train + cfg.split_val + cfg.split_test;
  const int n_train = cfg.n * cfg.split_train / total;
  const int n_val = cfg.n * cfg.split_val / total;
  std::vector<Split> split_of(cfg.n, Split::Test);
  for (int i = 0; i < cfg.n; ++i) {
    if (i < n_train) split_of[order[i]] = Split::Train;
    else if (i < n_train + n_val) split_of[order[i]] = Split::Val;
  }

  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir);
  manifest << "size=" << cfg.image_size << "\n"
           << "n=" << cfg.n << "\n"
           << "seed=" << cfg.seed << "\n"
           << "shift=" << cfg.shift << "\n";
  for (int i = 0; i < cfg.n; ++i) {
    Sample smp = make_sample(cfg.seed, i, cfg.image_size, cfg.shift != 0);
    const std::string img_rel = "images/" + smp.id + ".pgm";
    const std::string mask_rel = "masks/" + smp.id + ".pgm";
    write_pgm(smp.image, (fs::path(dir) / img_rel).string());
    write_mask_pgm(smp.mask, (fs::path(dir) / mask_rel).string());
    manifest << "sample " << smp.id << " " << img_rel << " " << mask_rel << " "
             << split_name(split_of[i]) << "\n";
  }
  if (!manifest) throw std::runtime_error("manifest write failed in " + dir);
}

Dataset Dataset::load(const std::string& dir) {
  Dataset ds;
  ds.dir_ = dir;
  std::ifstream is(fs::path(dir) / "manifest.txt");
  if (!is) throw std::runtime_error("no manifest.txt in " + dir);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("size=", 0) == 0) {
      ds.image_size_ = std::stoi(line.substr(5));
    } else if (line.rfind("sample ", 0) == 0) {
      std::istringstream ss(line);
      std::string tag, split;
      Entry e;
      ss >> tag >> e.id >> e.image_rel >> e.mask_rel >> split;
      if (!ss) throw std::runtime_error("bad manifest line: " + line);
      e.split = split == "train" ? Split::Train : (split == "val" ? Split::Val : Split::Test);
      const int idx = static_cast<int>(ds.entries_.size());
      (e.split == Split::Train ? ds.train_ : e.split == Split::Val ? ds.val_ : ds.test_)
          .push_back(idx);
      ds.entries_.push_back(std::move(e));
    }
  }
  if (ds.entries_.empty()) throw std::runtime_error("empty dataset manifest in " + dir);
  return ds;
}

const std::vector<int>& Dataset::indices(Split s) const {
  switch (s) {
    case Split::Train: return train_;
    case Split::Val: return val_;
    default: return test_;
  }
}

Sample Dataset::load_sample(int index) const {
  const Entry& e = entries_.at(static_cast<std::size_t>(index));
  Sample s;
  s.id = e.id;
  s.image = read_pgm((fs::path(dir_) / e.image_rel).string());
  s.mask = read_mask_pgm((fs::path(dir_) / e.mask_rel).string());
  return s;
}

double Dataset::trivial_dice() const {
  // all-foreground predictor: mean over samples of 2|G| / (|G| + H*W)
  double acc = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Sample s = load_sample(static_cast<int>(i));
    double fg = 0.0;
    for (double v : s.mask.data) fg += v;
    acc += 2.0 * fg / (fg + static_cast<double>(s.mask.size()));
  }
  return acc / static_cast<double>(entries_.size());
}

} // namespace freqseg
