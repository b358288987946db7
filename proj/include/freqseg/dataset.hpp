#pragma once

#include <string>
#include <vector>

#include "freqseg/config.hpp"
#include "freqseg/tensor.hpp"

namespace freqseg {

enum class Split { Train, Val, Test };

struct Sample {
  std::string id;
  Tensor image; // (1,1,H,W) in [0,1]
  Tensor mask;  // (1,1,H,W) in {0,1}
};

// Synthetic degraded-boundary samples: 1-3 random ellipses as foreground,
// Gaussian boundary blur, multiplicative speckle, low foreground/background
// contrast. The mask stays the crisp (unblurred) ellipse union. Everything is
// derived per-sample from (seed, index), so generation is order-independent
// and byte-identical across runs.
Sample make_sample(std::uint64_t seed, int index, int size, bool shift);

// writes images/<id>.pgm, masks/<id>.pgm and manifest.txt with split tags
void generate_dataset(const RunConfig& cfg, const std::string& dir);

class Dataset {
 public:
  static Dataset load(const std::string& dir);
  const std::vector<int>& indices(Split s) const;
  Sample load_sample(int index) const;       // by manifest index
  std::size_t size() const { return entries_.size(); }
  int image_size() const { return image_size_; }
  // mean foreground fraction -> Dice of the trivial all-foreground predictor
  double trivial_dice() const;

 private:
  struct Entry {
    std::string id, image_rel, mask_rel;
    Split split;
  };
  std::string dir_;
  std::vector<Entry> entries_;
  std::vector<int> train_, val_, test_;
  int image_size_ = 0;
  double fg_fraction_sum_ = 0.0;
};

} // namespace freqseg
