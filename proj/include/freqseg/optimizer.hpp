#pragma once

#include <map>
#include <string>

#include "freqseg/params.hpp"

namespace freqseg {

struct AdamConfig {
  double lr0 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.98; // lr(epoch) = lr0 * decay^epoch, applied per epoch
};

// Bias-corrected Adam over the trainable ParamStore entries. Frozen entries
// are never touched. Moments are lazily allocated on first step so a loaded
// checkpoint can inject saved state beforehand.
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  double lr_for_epoch(int epoch) const;
  void step(ParamStore& ps, int epoch);

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return t_; }

  // checkpoint plumbing
  struct Slot {
    Tensor m, v;
  };
  std::map<std::string, Slot>& slots() { return slots_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  void set_step_count(long t) { t_ = t; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, Slot> slots_;
};

} // namespace freqseg
